import os
from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()


def _env_flag(name, default='False'):
    return os.environ.get(name, default) == 'True'


class Config:
    """
    Configuration class for oto-clock.
    Values come from environment variables (or a .env file) with defaults.
    Command-line flags and experiment files take precedence over these.
    """
    # General configuration
    DEBUG = _env_flag('OTO_CLOCK_DEBUG')

    # Worker pool size used when --threads is not given
    THREADS = int(os.environ.get('OTO_CLOCK_THREADS', 1))

    # Largest dimension handed to the dense eigensolver
    DENSE_CAP = int(os.environ.get('OTO_CLOCK_DENSE_CAP', 8192))

    # Max-norm tolerance for Hermiticity checks on construction
    HERMITIAN_TOL = float(os.environ.get('OTO_CLOCK_HERMITIAN_TOL', 1e-12))

    # Seed used when neither a flag nor the experiment file provides one
    DEFAULT_SEED = int(os.environ.get('OTO_CLOCK_SEED', 1234))

    OUTPUT_DIR = os.environ.get('OTO_CLOCK_OUTPUT_DIR', 'results')

    @classmethod
    def threads(cls):
        """Worker count, re-reading the environment so late overrides apply."""
        return max(1, int(os.environ.get('OTO_CLOCK_THREADS', cls.THREADS)))
