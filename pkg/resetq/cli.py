import click
from flask.cli import FlaskGroup

from resetq.app import create_app


@click.group(cls=FlaskGroup, create_app=create_app, add_default_commands=False,
             add_version_option=False, load_dotenv=False)
def cli():
    """Mean service times, optimal resetting and queue statistics of S&X queues."""


def main():
    cli(prog_name='resetq')


if __name__ == '__main__':
    main()
