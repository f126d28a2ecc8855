"""Quantum-orbit machinery for high-harmonic generation.

Complex saddle-point solutions of the strong-field approximation,
harmonic-cutoff times, orbit classification via separatrices, and
harmonic spectra in the saddle-point, uniform, and harmonic-cutoff
approximations.
"""

__version__ = "0.1.0"

from .waveform import FourierField, linear_monochromatic, bicircular
from .action import AtomParams, VolkovAction
from .saddles import (SaddleSolution, HarmonicCutoff, solve_saddle,
                      find_saddles, continue_orbit, solve_cutoff,
                      find_all_cutoffs)
from .classify import Separatrix, OrbitLabel, separatrix, classify, audit_orbits
from .orbits import QuantumOrbit, quantum_orbits, audit_orbit_set
from .specfun import AiryResult, airy_ai, airy_contour_check, cubic_rotation
from .spectra import (Prefactor, SpectrumLine, spa_amplitude, spa_track,
                      pair_orbits, stokes_drops, spa_spectrum,
                      uniform_approx, hca_core, hca_amplitude, hca_spectrum,
                      find_fringes, fringe_contrast)
from .scans import (CutoffLostError, CutoffLawSample, CutoffLawFit,
                    CutoffLawScan, TransitionEvent, MixingScan, RiemannMesh,
                    classical_return_energy, classical_cutoff_constant,
                    solve_energy_cutoff, fit_cutoff_law, cutoff_law_scan,
                    pair_separation, mixing_scan, riemann_mesh, write_mesh,
                    read_mesh, cover_audit)
