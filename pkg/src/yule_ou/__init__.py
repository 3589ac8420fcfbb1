from yule_ou.configurations.logging_config import setup_logging

setup_logging()
