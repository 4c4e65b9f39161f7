"""Simulation and analysis engine for on-demand conversion of microwave
photons to optical photons in a driven Rydberg ensemble.

The package splits into: steady-state preparation (`cpt`), the
frequency-domain propagation chain (`spectral`), the time-domain
storage/retrieval solver (`solver`), interaction-induced and motional
dephasing (`dephasing`), blackbody noise (`thermal`), photon statistics
(`photon_stats`), model fitting (`fitting`), instrument calibration
(`calibration`), and the batch experiment harness (`experiments`, `cli`).
"""

__version__ = "0.1.0"

from .config import TransducerConfig, load_config, bundled_config_path

__all__ = ["TransducerConfig", "load_config", "bundled_config_path",
           "__version__"]
