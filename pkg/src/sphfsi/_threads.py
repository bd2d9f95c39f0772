"""Worker-thread configuration for the compiled inner loops.

All compiled loops are gathers over a destination particle with a fixed
per-row summation order, so results are bit-identical for any thread count.
``SPH_FSI_THREADS`` only caps how many threads numba may use.
"""

import os


def configure_threads() -> int:
    """Apply ``SPH_FSI_THREADS`` before numba spins up its thread pool.

    Returns the number of threads in use.
    """
    requested = os.environ.get("SPH_FSI_THREADS", "")
    if requested:
        n = max(1, int(requested))
        # Must be set before the first parallel region; raising the pool size
        # above the detected CPU count requires the env var route.
        os.environ.setdefault("NUMBA_NUM_THREADS", str(n))
        import numba

        try:
            numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
        except ValueError:
            pass
        return numba.get_num_threads()
    import numba

    return numba.get_num_threads()
