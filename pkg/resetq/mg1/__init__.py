from flask import Blueprint

mg1_bp = Blueprint('mg1', __name__, cli_group=None)

from resetq.mg1 import commands
