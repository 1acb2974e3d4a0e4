import os

from dotenv import load_dotenv

# --- Load .env in development checkouts ---
if os.path.exists(".env"):
    load_dotenv()


# --- Env access helper ---
def get_env(key: str, required: bool = True, default: str | None = None) -> str | None:
    val = os.getenv(key, default)
    if required and not val:
        raise RuntimeError(f"Missing required environment variable: {key}")
    return val


def _int_env(key: str, default: int) -> int:
    raw = get_env(key, required=False, default=str(default)) or str(default)
    try:
        return int(raw)
    except ValueError:
        raise RuntimeError(f"{key} must be an integer, got: {raw}")


def _float_env(key: str, default: float) -> float:
    raw = get_env(key, required=False, default=str(default)) or str(default)
    try:
        return float(raw)
    except ValueError:
        raise RuntimeError(f"{key} must be a number, got: {raw}")


# --- Logging configuration ---
LOG_LEVEL = (
    get_env("LOG_LEVEL", required=False, default="DEBUG" if os.path.exists(".env") else "INFO") or "INFO"
).upper()
DEBUG = LOG_LEVEL == "DEBUG"

# --- Audio conventions ---
SAMPLE_RATE = 16000
SAMPLE_MIN = -32768.0
SAMPLE_MAX = 32767.0
UNIT_SCALE = 32768.0  # divides the 16-bit scale down to [-1, 1)

# --- Spectrum transform defaults ---
MDCT_WINDOW = _int_env("STA_MDCT_MDCT_WINDOW", 1024)
if MDCT_WINDOW < 4 or MDCT_WINDOW % 2:
    raise RuntimeError(f"STA_MDCT_MDCT_WINDOW must be even and >= 4, got: {MDCT_WINDOW}")

KBD_BETA = _float_env("STA_MDCT_KBD_BETA", 4.0)
if KBD_BETA < 0:
    raise RuntimeError(f"STA_MDCT_KBD_BETA must be non-negative, got: {KBD_BETA}")

# --- Runs ---
RESULTS_DIR = get_env("STA_MDCT_RESULTS_DIR", required=False, default="results") or "results"
DEFAULT_SEED = _int_env("STA_MDCT_SEED", 0)

# Thread pool size for trial-level concurrency inside one experiment cell
WORKERS = _int_env("STA_MDCT_WORKERS", 4)
if WORKERS < 1:
    raise RuntimeError(f"STA_MDCT_WORKERS must be >= 1, got: {WORKERS}")
