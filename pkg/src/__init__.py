from src.config import Config

__version__ = Config.TOOL_VERSION
