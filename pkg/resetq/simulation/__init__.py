from flask import Blueprint

simulation_bp = Blueprint('simulation', __name__, cli_group=None)

from resetq.simulation import commands
