"""Numerical toolkit for half-line Schrodinger operators with a periodic
background and decaying oscillatory perturbations: band/Floquet data, the
harmonic recursion tables, resonant-energy enumeration, Prufer flows, and
embedded-eigenvalue construction."""

from .errors import (BandDomainError, ConfigError, DegenerateFloquetError,
                     InsufficientRangeError, IntegrationError,
                     NonConvergenceError, PreconditionError,
                     ShorterSumError, SmallDivisorError, SteeringError,
                     UnwrapError, WvnlabError, ZeroMeanError)
from .fourier import FourierSeries
from .floquet import (Band, BandStructure, CellContext, FloquetData,
                      Monodromy, PeriodicPotential, band_structure,
                      discriminant, floquet_solution, fourier_of_p,
                      free_potential, integrate_cell, kronig_penney_potential,
                      load_potential_file, mathieu_potential,
                      potential_from_spec, quasimomentum, two_cos_potential)
from .gbv import (ConditionReport, CustomEnvelope, Envelope, GBVPerturbation,
                  PowerSum, PowerTail, SampledEnvelope, Term,
                  build_example_potential, build_wigner_von_neumann,
                  condition_report, load_perturbation_file,
                  perturbation_from_spec, zero_perturbation)
from .harmonics import (RECURSION_WEIGHTS, HarmonicTable, angle_distance,
                        compute_table, h_value, lambda_op, mean_criterion,
                        recursion_weight, symmetric_product, tilde_phi,
                        verify_recursion, wrap_angle)
from .resonance import (PhaseSum, ResonanceSet, ResonantEnergy,
                        SmallDivisorSum, hausdorff_bound, phase_sums,
                        resonant_energies, smalldivisor_sum)
from .prufer import (DirectSolution, PruferTrajectory, Verdict,
                     WronskianReport, classify, decompose, direct_solve,
                     flow, rho_from_solution, s11_increment_check,
                     two_solution_check)
from .embed import (EmbeddingPlan, EmbedReport, ScanResult, SteeredRun,
                    assemble_potential, choose_beta0, demo_embedded,
                    engineered_zero_context, genericity_scan, plan, steer_xi)

__version__ = "0.1.0"
