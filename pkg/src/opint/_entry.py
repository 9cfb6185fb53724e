"""Console-script launcher.

Reads OPINT_THREADS before numpy is imported so the cap can be applied
to the BLAS thread pools; absence means the implementation default.
"""

import os
import sys


def main(argv=None):
    threads = os.environ.get("OPINT_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    from .cli import main as cli_main
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
