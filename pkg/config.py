# Configuration management
import os
from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()

PARAPHRASE_CONFIG = {
    "endpoint": os.getenv("LTL_PARAPHRASE_ENDPOINT"),  # text-completion URL
    "model": os.getenv("LTL_PARAPHRASE_MODEL", "text-davinci-003"),
    "api_key": os.getenv("LTL_PARAPHRASE_API_KEY"),
    "max_concurrency": int(os.getenv("LTL_PARAPHRASE_MAX_CONCURRENCY", "4")),
    "max_attempts": int(os.getenv("LTL_PARAPHRASE_MAX_ATTEMPTS", "3")),
    "backoff_base_s": float(os.getenv("LTL_PARAPHRASE_BACKOFF_S", "1.0")),
    "timeout_s": float(os.getenv("LTL_PARAPHRASE_TIMEOUT_S", "60")),
    "temperature": 0.7,
    "max_tokens": 512,
    "cache_size": 4096,
}

SCORER_CONFIG = {
    "endpoint": os.getenv("LTL_SCORER_ENDPOINT"),  # next-token log-probability service
    "api_key": os.getenv("LTL_SCORER_API_KEY"),
    "timeout_s": float(os.getenv("LTL_SCORER_TIMEOUT_S", "30")),
    "max_attempts": int(os.getenv("LTL_SCORER_MAX_ATTEMPTS", "3")),
    "backoff_base_s": 0.5,
}

DECODER_DEFAULTS = {
    "alpha": 0.1,             # additive smoothing
    "mixture_weight": 0.5,    # co-occurrence vs output bigram
    "position_buckets": 4,
    "position_weight": 0.5,   # position-aware vs plain co-occurrence
    "max_position": 64,
    "beam": 1,
    "max_len": 64,
    "score_floor": -1e9,
}

EVAL_DEFAULTS = {
    "k_folds": 5,
    "seed": 0,
    "workers": 1,
    "n_paraphrases": 10,
}

LOG_LEVEL = os.getenv("LTL_LOG_LEVEL", "INFO").upper()

# Example of how to access configuration
if __name__ == "__main__":
    print("Paraphrase service (values are from environment variables if set, otherwise defaults):")
    for key, value in PARAPHRASE_CONFIG.items():
        print(f"    {key}: {'***' if key == 'api_key' and value else value}")
    print("Decoder defaults:", DECODER_DEFAULTS)
    print("Eval defaults:", EVAL_DEFAULTS)
    if not PARAPHRASE_CONFIG["endpoint"]:
        print("- LTL_PARAPHRASE_ENDPOINT is not set; use the fallback paraphraser (--paraphrase-backend fallback).")
