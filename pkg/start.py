from app.cli import cli
from app.config import Config
from app.logger import Logger

logger = Logger().get_logger(__name__)
config = Config()


if __name__ == "__main__":
    cli(prog_name="harqlab")
