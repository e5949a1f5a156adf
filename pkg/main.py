import sys

from flask import Flask

from core.configs import server_config, setup_logging
from controllers.homology.homology_controllers import homology_blueprint


def create_app() -> Flask:
    setup_logging()
    app = Flask(__name__)
    app.json.ensure_ascii = False
    app.json.sort_keys = False
    app.register_blueprint(homology_blueprint)
    return app


if __name__ == '__main__':
    if len(sys.argv) > 1:
        from controllers.homology.cli_controllers import main
        sys.exit(main(sys.argv[1:]))
    create_app().run(host=server_config["host"], port=server_config["port"], debug=False)
