"""
以纯文本 LP 格式导出程序，便于与外部求解器交叉核对
系数保持精确分数，不做浮点化
"""

from fractions import Fraction
from typing import List

from core.rational import format_fraction

from .program import LinearProgram


def _term(coefficient: Fraction, name: str, first: bool) -> str:
    sign = "-" if coefficient < 0 else ("" if first else "+")
    magnitude = abs(coefficient)
    text = name if magnitude == 1 else f"{format_fraction(magnitude)} {name}"
    return f"{sign} {text}".strip() if first else f"{sign} {text}"


def dump_lp(program: LinearProgram, name: str = "program") -> str:
    """把标准形程序写成 minimize / subject to / bounds / general / end 段落。"""
    names = program.variable_names or [f"x{j}" for j in range(program.num_variables)]
    lines: List[str] = [f"\\ {name}", "minimize"]
    objective = [_term(c, names[j], not k) for k, (j, c) in enumerate((j, c) for j, c in enumerate(program.objective) if c)]
    if program.objective_offset:
        objective.append(f"+ {format_fraction(program.objective_offset)}" if objective else format_fraction(program.objective_offset))
    lines.append(" obj: " + (" ".join(objective) if objective else "0"))
    lines.append("subject to")
    rows: List[List[str]] = [[] for _ in range(program.num_constraints)]
    matrix = program.constraint_matrix
    for j in range(matrix.num_cols):
        for i, value in matrix.column(j):
            rows[i].append(_term(value, names[j], not rows[i]))
    for i, terms in enumerate(rows):
        left = " ".join(terms) if terms else "0"
        lines.append(f" c{i}: {left} = {format_fraction(program.rhs[i])}")
    lines.append("bounds")
    for variable in names:
        lines.append(f" {variable} >= 0")
    integral = [names[j] for j, flag in enumerate(program.integrality_mask) if flag]
    if integral:
        lines.append("general")
        lines.append(" " + " ".join(integral))
    lines.append("end")
    return "\n".join(lines) + "\n"
