import argparse
import logging
import sys
import time

import config
from commands.braid import cmd_braid
from commands.gap_sweep import cmd_gap_sweep
from commands.lattice_info import cmd_lattice_info
from commands.phase_diagram import cmd_phase_diagram
from commands.spectrum import cmd_spectrum
from models.errors import KitaevLabError
from utils.output_handler import OutputHandler
from utils.run_config import build_run_config

logger = logging.getLogger("kitaev_lab")

COMMANDS = {
    "lattice-info": cmd_lattice_info,
    "spectrum": cmd_spectrum,
    "phase-diagram": cmd_phase_diagram,
    "gap-sweep": cmd_gap_sweep,
    "braid": cmd_braid,
}

# argparse bookkeeping that is not part of the run config
_NON_CONFIG = {"command", "config", "verbose"}


class UsageError(Exception):
    pass


class LabArgumentParser(argparse.ArgumentParser):
    """Raise instead of exiting so main() owns every exit code"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _flux(text: str):
    return [int(w) for w in text.replace(",", " ").split()]


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--lx", type=int, help="unit cells along x")
    parser.add_argument("--ly", type=int, help="unit cells along y")
    parser.add_argument("--lattice", help="extents as LxxLy, e.g. 3x3")
    parser.add_argument("--bc", choices=["torus", "open"], help="boundary condition")
    parser.add_argument("--output", help="output file (bare names go to the output directory)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")


def _add_couplings(parser: argparse.ArgumentParser):
    for name in ("jx", "jy", "jz", "hx", "hy", "hz"):
        parser.add_argument(f"--{name}", type=float)
    parser.add_argument("--t-plus", dest="t_plus", type=float, nargs=3, metavar=("TX", "TY", "TZ"),
                        help="tunneling amplitudes; with --u derives J = t^2/2U and h = 4t^2/U")
    parser.add_argument("--u", type=float, help="on-site interaction U for --t-plus")


def build_parser() -> argparse.ArgumentParser:
    parser = LabArgumentParser(prog="kitaev-lab", description="Kitaev honeycomb model lab")
    parser.add_argument("--version", action="version", version=f"%(prog)s {config.__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=LabArgumentParser)

    info = sub.add_parser("lattice-info", help="dump lattice geometry")
    _add_common(info)

    spectrum = sub.add_parser("spectrum", help="lowest eigenpairs by exact diagonalization")
    _add_common(spectrum)
    _add_couplings(spectrum)
    spectrum.add_argument("--k", type=int, help="number of eigenpairs")
    spectrum.add_argument("--tol", type=float, help="relative residual tolerance")
    spectrum.add_argument("--flux", type=_flux, help="target W_p pattern, e.g. '1,1,-1,-1'")
    spectrum.add_argument("--dump-vectors", dest="dump_vectors", action="store_true", default=None)
    spectrum.add_argument("--solver", choices=["auto", "dense", "lanczos"])

    diagram = sub.add_parser("phase-diagram", help="phase and gap over the coupling simplex")
    _add_common(diagram)
    diagram.add_argument("--step", type=float, help="grid spacing on the simplex")
    diagram.add_argument("--gap-size", dest="gap_size", type=int, help="linear torus size for the gap")
    diagram.add_argument("--xlsx", action="store_true", default=None, help="also write an Excel workbook")

    sweep = sub.add_parser("gap-sweep", help="bulk gap against system size")
    _add_common(sweep)
    _add_couplings(sweep)
    sweep.add_argument("--sizes", type=int, nargs="+")
    sweep.add_argument("--xlsx", action="store_true", default=None)

    braid = sub.add_parser("braid", help="ancilla interferometry of a vortex braid")
    _add_common(braid)
    _add_couplings(braid)
    braid.add_argument("--loops", type=int, action="append", help="braid loop count (repeatable)")
    braid.add_argument("--discriminate", action="store_true", default=None)
    braid.add_argument("--braid-plaquette", dest="braid_plaquette", type=int)
    braid.add_argument("--creation-site", dest="creation_site", type=int)
    braid.add_argument("--numbering", choices=["loop", "plaquette"])
    braid.add_argument("--measure-angle", dest="measure_angle", type=float)
    return parser


def configure_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    """CLI entry point; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return config.EXIT_CODES["usage"]

    configure_logging(args.verbose)
    flags = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}

    try:
        cfg = build_run_config(args.command, flags, args.config)
        handler = OutputHandler()
        start = time.perf_counter()
        result = COMMANDS[args.command](cfg, handler)
        wall_time = time.perf_counter() - start
        for path in result.outputs:
            handler.write_manifest(path, cfg.to_dict(), wall_time, result.manifest_extra)
    except KitaevLabError as e:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    print(result.stdout)
    return config.EXIT_CODES["success"]


if __name__ == "__main__":
    sys.exit(main())
