from resetq.app import create_app
