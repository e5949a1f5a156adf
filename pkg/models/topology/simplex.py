from typing import List, Sequence, Tuple

# 单形用严格递增的顶点元组表示，维数 = 顶点数 - 1
Simplex = Tuple[int, ...]


def make_simplex(vertices: Sequence[int]) -> Simplex:
    simplex = tuple(sorted(int(v) for v in vertices))
    if len(set(simplex)) != len(simplex):
        raise ValueError(f"单形顶点重复: {tuple(vertices)}")
    return simplex


def simplex_faces(simplex: Simplex) -> List[Tuple[int, Simplex]]:
    """按被删去顶点的位置 i 返回 (i, 面)，边界系数为 (-1)^i。"""
    if len(simplex) < 2:
        return []
    return [(i, simplex[:i] + simplex[i + 1:]) for i in range(len(simplex))]
