"""Command-line driver: branch points -> periods -> b -> basis -> transformant -> field.

Exit status is 0 on success, 1 on a hard error and 2 when a verification
check (or the oracle comparison) fails.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import snapshot
from .basis import Basis, algorithm1, algorithm2, g_functions, hodograph_csv
from .checks import run_all
from .field import field_grid, heatmap_pgm
from .lattice import check_wavenumber, incident_params
from .oracle import TruncatedProblem, compare, direct_solve
from .surface import Surface
from .transformant import Transformant

log = logging.getLogger("latticewedge")

OUTPUTS = ("field_csv", "heatmap", "hodograph_csv", "snapshot")
ORACLE_TOL = 1e-3
EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


@dataclass
class RunConfig:
    k_re: float
    k_im: float = 0.0
    phi_in: float = math.pi / 4
    extent: int = 40
    contour_nodes: int = 50000
    mode: str = "solve"
    outputs: set = field(default_factory=lambda: {"field_csv", "heatmap", "snapshot"})
    out_dir: Path = Path(".")
    truncation: int = 120
    margin: int = 30
    algorithm: int = 1

    @property
    def K(self) -> complex:
        return complex(self.k_re, self.k_im)

    def validate(self) -> None:
        check_wavenumber(self.K)
        if self.k_re >= 2:
            raise ValueError("the contour construction assumes 0 < Re K < 2")
        if self.contour_nodes < 256:
            raise ValueError("--contour-nodes must be at least 256")
        if self.extent < 4:
            raise ValueError("--extent must be at least 4")
        if not 0 < self.phi_in < math.pi / 2:
            raise ValueError("--phi-in must lie strictly between 0 and pi/2")
        unknown = set(self.outputs) - set(OUTPUTS)
        if unknown:
            raise ValueError(f"unknown outputs: {sorted(unknown)}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latticewedge",
                                description="Diffraction by a Dirichlet right angle on the square lattice.")
    p.add_argument("--k-re", type=float, required=True, help="real part of the wavenumber K")
    p.add_argument("--k-im", type=float, default=0.0, help="imaginary part of K (absorption)")
    p.add_argument("--phi-in", type=float, default=math.pi / 4, help="incidence angle in radians")
    p.add_argument("--extent", type=int, default=40, help="half-width of the output grid")
    p.add_argument("--contour-nodes", type=int, default=50000, help="quadrature nodes per contour")
    p.add_argument("--mode", choices=("solve", "verify", "oracle-compare"), default="solve")
    p.add_argument("--outputs", nargs="*", default=["field_csv", "heatmap", "snapshot"], choices=OUTPUTS,
                   help="artifacts written in solve mode")
    p.add_argument("--out-dir", type=Path, default=Path("."), help="directory for written artifacts")
    p.add_argument("--truncation", type=int, default=120, help="oracle truncation half-width N")
    p.add_argument("--margin", type=int, default=30, help="rim discarded in the oracle comparison")
    p.add_argument("--algorithm", type=int, choices=(1, 2), default=1, help="how b is located")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(args.k_re, args.k_im, args.phi_in, args.extent, args.contour_nodes, args.mode,
                     set(args.outputs), args.out_dir, args.truncation, args.margin, args.algorithm)


def _pipeline(cfg: RunConfig):
    S = Surface(cfg.K)
    periods = S.periods(4096)
    log.info("T_alpha = %s, T_beta = %s", periods.T_alpha, periods.T_beta)
    bp = algorithm1(S, periods) if cfg.algorithm == 1 else algorithm2(S)
    log.info("b = %s on sheet %d", bp.b, bp.sheet)
    basis = Basis(S, bp)
    trans = Transformant(basis, incident_params(cfg.K, cfg.phi_in))
    return S, periods, basis, trans


def _fmt(z: complex) -> str:
    return f"{z.real:.15f} {'+' if z.imag >= 0 else '-'} {abs(z.imag):.15f}i"


def run_solve(cfg: RunConfig) -> int:
    S, periods, basis, trans = _pipeline(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if "snapshot" in cfg.outputs:
        snapshot.write(cfg.out_dir / "snapshot.txt", trans.snapshot(periods))
    if "hodograph_csv" in cfg.outputs:
        g1, _ = g_functions(S, basis.bpoint)
        for name, c in (("alpha", S.sigma_alpha()), ("beta", S.sigma_beta())):
            (cfg.out_dir / f"hodograph_{name}.csv").write_text(hodograph_csv(g1(c.affix, c.ups)))
    t0 = time.perf_counter()
    res = field_grid(trans, cfg.extent, cfg.contour_nodes)
    log.info("field on [-%d, %d]^2 in %.2f s", cfg.extent, cfg.extent, time.perf_counter() - t0)
    if "field_csv" in cfg.outputs:
        (cfg.out_dir / "field.csv").write_text(res.to_csv())
    if "heatmap" in cfg.outputs:
        (cfg.out_dir / "field_re.pgm").write_text(heatmap_pgm(res.total.values.real, res.total.mask()))
    d = res.diagnostics
    print(f"b = {_fmt(basis.bpoint.b)} (sheet {basis.bpoint.sheet})")
    print(f"T_beta = {_fmt(periods.T_beta)}")
    print(f"boundary max |u| = {d['boundary_max']:.3e}")
    print(f"stencil residual max = {d['stencil_max']:.3e}")
    return EXIT_OK


def run_verify(cfg: RunConfig) -> int:
    S = Surface(cfg.K)
    periods = S.periods(max(cfg.contour_nodes, 4096))
    bp = algorithm1(S, periods)
    print(f"b = {_fmt(bp.b)} (sheet {bp.sheet})")
    print(f"T_beta = {_fmt(periods.T_beta)}")
    checks = run_all(cfg.K, cfg.phi_in, nodes=4096, extent=min(cfg.extent, 10), algorithm=cfg.algorithm)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_FAILED if failed else EXIT_OK


def run_oracle(cfg: RunConfig) -> int:
    _, _, _, trans = _pipeline(cfg)
    prob = TruncatedProblem(cfg.K, trans.inc, cfg.truncation)
    ref = direct_solve(prob)
    extent = cfg.truncation - cfg.margin
    res = field_grid(trans, extent, min(cfg.contour_nodes, 8192))
    disc = compare(res, ref.scattered, cfg.margin)
    print(f"oracle residual = {ref.residual:.3e}")
    print(f"discrepancy = {disc:.3e}")
    return EXIT_OK if disc < ORACLE_TOL else EXIT_FAILED


def run(cfg: RunConfig) -> int:
    cfg.validate()
    if cfg.mode == "solve":
        return run_solve(cfg)
    if cfg.mode == "verify":
        return run_verify(cfg)
    return run_oracle(cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return run(config_from_args(args))
    except Exception as exc:  # every failure maps to the hard-error exit code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
