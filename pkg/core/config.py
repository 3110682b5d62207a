from pathlib import Path
from typing import Literal
from pydantic_settings import BaseSettings, SettingsConfigDict

# Base directory for flexible path resolution
BASE_DIR = Path(__file__).parent.parent

class Settings(BaseSettings):
    # Read from QLP_<NAME> environment variables or .env
    LOG_LEVEL: str = "INFO"

    # Simplex tolerances: absolute residual on G z <= h, and pivot zero test
    LP_FEAS_TOL: float = 1e-9
    LP_PIVOT_TOL: float = 1e-10
    LP_PIVOT_RULE: Literal["bland", "dantzig"] = "bland"

    # Linearized ADMM for BPDN2
    BPDN2_TOL: float = 1e-7
    BPDN2_MAX_ITERS: int = 20000
    BPDN2_PENALTY: float = 1.0

    # Normalized IHT
    NIHT_TOL: float = 1e-6
    NIHT_MAX_ITERS: int = 1000

    # Entries with |x_i| <= ZERO_TOL_FACTOR * r count as zero in the metrics
    ZERO_TOL_FACTOR: float = 1e-4

    # Sweep execution
    SWEEP_WORKERS: int = 1
    SWEEP_EXECUTOR: Literal["process", "thread"] = "process"
    OUTPUT_DIR: str = str(BASE_DIR / "results")

    model_config = SettingsConfigDict(
        env_prefix="QLP_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    def default_zero_tol(self, r: float) -> float:
        """Threshold below which a recovered entry is treated as zero.

        Args:
            r: Amplitude bound of the nonzero entries.

        Returns:
            float: ZERO_TOL_FACTOR scaled by the signal amplitude.
        """
        return self.ZERO_TOL_FACTOR * r

settings = Settings()
