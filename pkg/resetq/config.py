import os


class Config:
    RESETQ_THREADS = int(os.getenv('RESETQ_THREADS', '1'))
    LOG_LEVEL = os.getenv('RESETQ_LOG_LEVEL', 'INFO')

    QUAD_REL_TOL = float(os.getenv('RESETQ_QUAD_REL_TOL', '1e-10'))
    PMF_TAIL_TARGET = float(os.getenv('RESETQ_PMF_TAIL_TARGET', '1e-6'))

    DEFAULT_SEED = int(os.getenv('RESETQ_SEED', '20240101'))
    SIM_REPLICATIONS = int(os.getenv('RESETQ_SIM_REPLICATIONS', '20'))
    SIM_SERVICE_DRAWS = int(os.getenv('RESETQ_SIM_SERVICE_DRAWS', '100000'))


class TestConfig(Config):
    TESTING = True
    RESETQ_THREADS = 1
    LOG_LEVEL = 'WARNING'
    SIM_REPLICATIONS = 5
    SIM_SERVICE_DRAWS = 20000
