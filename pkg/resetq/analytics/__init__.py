from flask import Blueprint

analytics_bp = Blueprint('analytics', __name__, cli_group=None)

from resetq.analytics import commands
