from dotenv import load_dotenv
from utils.logging_setup import LoggingSetup

# Only LOGGING_CONFIG_PATH is read from the environment; scenes never are.
load_dotenv()

TOOL_NAME = "cavity-diffusion"
TOOL_VERSION = "0.1.0"

physics_logger = LoggingSetup.get_physics_logger()
oracle_logger = LoggingSetup.get_oracle_logger()
analysis_logger = LoggingSetup.get_analysis_logger()
cli_logger = LoggingSetup.get_cli_logger()
