import logging

import pandas as pd

import config
from commands.base import CommandResult, lattice_from
from models.majorana import sector_ground_energy
from models.spin_ed import build_hamiltonian, ground_states, sector_ground, wp_profile
from utils.output_handler import OutputHandler
from utils.run_config import RunConfig

logger = logging.getLogger(__name__)


def cmd_spectrum(cfg: RunConfig, handler: OutputHandler) -> CommandResult:
    """Lowest eigenpairs by ED, optionally restricted to a flux sector"""
    lattice = lattice_from(cfg)
    params = cfg.couplings()
    H = build_hamiltonian(lattice, params)

    if cfg.flux is not None:
        result = sector_ground(H, lattice, cfg.flux, cfg.k, tol=cfg.tol, seed=cfg.seed, solver=cfg.solver)
    else:
        result = ground_states(H, cfg.k, tol=cfg.tol, seed=cfg.seed, solver=cfg.solver)
    result.warnings += params.warnings

    payload = {
        "lattice": {"Lx": lattice.Lx, "Ly": lattice.Ly, "boundary": lattice.boundary.value,
                    "num_sites": lattice.num_sites},
        "couplings": params.to_dict(),
        "num_terms": len(H.terms),
        "flux": cfg.flux,
        **result.to_dict(dump_vectors=cfg.dump_vectors),
        "multiplets": result.multiplets(H.scale),
        "wp_profiles": [wp_profile(v, lattice).values for v in result.eigenvectors],
    }
    if not params.has_field:
        flux = cfg.flux if cfg.flux is not None else [1] * lattice.num_plaquettes
        payload["majorana_sector_energy"] = sector_ground_energy(lattice, params, flux).ground_energy

    path = handler.save_to_json(payload, cfg.output or "spectrum.json")
    table = pd.DataFrame({
        "level": range(len(result.eigenvalues)),
        "energy": result.eigenvalues,
        "residual": result.residuals,
    })
    stdout = table.to_string(index=False, float_format=lambda v: f"{v:.{config.FLOAT_DIGITS}g}")
    return CommandResult(outputs=[path], stdout=stdout, manifest_extra={"solver": result.solver})
