import logging

from dotenv import load_dotenv
from flask import Flask

from resetq.config import Config
from resetq.extensions import pool

load_dotenv()


def create_app(config_class=Config):
    app = Flask(__name__)
    app.config.from_object(config_class)

    level = getattr(logging, str(app.config['LOG_LEVEL']).upper(), logging.INFO)
    logging.basicConfig(level=level, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    logging.getLogger('resetq').setLevel(level)

    pool.init_app(app)

    from resetq.analytics import analytics_bp
    from resetq.mg1 import mg1_bp
    from resetq.simulation import simulation_bp

    app.register_blueprint(analytics_bp)
    app.register_blueprint(mg1_bp)
    app.register_blueprint(simulation_bp)

    return app
