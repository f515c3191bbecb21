"""
Spectral Toolkit Command Line

python cli.py <subcommand> <document> [options]

Exit codes: 0 success, 1 unknown subcommand, 2 usage or validation error,
3 numerical failure.
"""

import argparse
import logging
import re
import sys
import time
from typing import List, Optional
import numpy as np
import pandas as pd

from analysis.classifier import (classify_regularity, completeness_certificate, dissipativity_check,
                                 riesz_verdict, synthesis_verdict)
from analysis.resolvent import (dissipation_sum_diagnostic, green_function, green_jump,
                                kernel_trace_difference, svalue_profile, trace_formula_diff)
from analysis.root_functions import (boundary_residual, chain_residual, defect_probe, root_chains)
from analysis.spectrum import Rectangle, SpectrumLocator, group_blocks
from beam.timoshenko import (BeamModel, beam_conditions, decoupled_oracle, reduce_to_dirac, validate_beam)
from config.solver_config import get_config
from dirac.asymptotics import build_sector_models, ray_comparison
from dirac.errors import NumericalError, ValidationError
from dirac.models import DiracBVP
from dirac.propagator import Propagator, StepControl, gauge_normalize, scaled_determinant
from dirac.sector_geometry import compute_fan
from documents.system_document import SystemDocumentCodec, system_to_dict
from utils.helpers import (dump_json, eigenvalue_table, frame_for_csv, parse_complex, parse_float_list,
                           write_table)

SUBCOMMANDS = ('fan', 'classify', 'spectrum', 'detscan', 'asymptotics', 'rootfns', 'green', 'svalues',
               'trace-diff', 'gauge', 'timoshenko')

# Options whose values may start with a minus sign, e.g. --region -0.5,6.5,-1,1
NUMERIC_LIST_OPTIONS = ('--region', '--lambda', '--ray', '--at', '--angles', '--radii', '--indices')
NEGATIVE_VALUE = re.compile(r"^-[\d.]")


class CommandContext:
    """Resolved configuration and helpers shared by the subcommand handlers"""

    def __init__(self, args: argparse.Namespace):
        """
        Initialize context
        Args:
            args: Parsed command line
        """
        self.args = args
        self.config = dict(get_config(args.profile))
        self.codec = SystemDocumentCodec()
        if args.tol is not None:
            self.config['spectrum'] = dict(self.config['spectrum'], tol=args.tol)
        if args.steps is not None:
            self.config['propagator'] = dict(self.config['propagator'], base_steps=args.steps)
        if args.seed is not None:
            self.config['root_functions'] = dict(self.config['root_functions'], probe_seed=args.seed)

    @property
    def ctrl(self) -> StepControl:
        return StepControl.from_config(self.config['propagator'])

    def propagator(self, bvp: DiracBVP) -> Propagator:
        return Propagator(bvp, self.ctrl, self.config['propagator'])

    def load(self, path: str):
        return self.codec.load(path)

    def load_system(self, path: str) -> DiracBVP:
        document = self.load(path)
        if isinstance(document, BeamModel):
            raise ValidationError(f"{path} is a beam document; use the timoshenko subcommand")
        return document

    def region(self, required: bool = True) -> Optional[Rectangle]:
        if self.args.region is None:
            if required:
                raise ValidationError("--region x0,x1,y0,y1 is required")
            return None
        return Rectangle.parse(self.args.region)

    def lam(self) -> complex:
        if self.args.lam is None:
            raise ValidationError("--lambda is required")
        try:
            return parse_complex(self.args.lam)
        except ValueError as e:
            raise ValidationError(str(e))

    def emit(self, data, frame: Optional[pd.DataFrame] = None):
        """Write JSON data, or the CSV table when --format csv and a table exists"""
        if self.args.format == 'csv':
            if frame is None:
                raise ValidationError(f"'{self.args.command}' has no CSV form; use --format json")
            text = write_table(frame_for_csv(frame))
        else:
            text = dump_json(data) + "\n"
        if self.args.out:
            with open(self.args.out, 'w', encoding='utf-8', newline='') as f:
                f.write(text)
        else:
            sys.stdout.write(text)


# ----------------------------------------------------------------------------
# Handlers
# ----------------------------------------------------------------------------

def run_fan(ctx: CommandContext):
    bvp = ctx.load_system(ctx.args.document)
    fan = compute_fan(bvp.weight, ctx.config['sector'])
    rows = []
    for index, ((start, end), z) in enumerate(zip(fan.sectors, fan.representatives)):
        rows.append({'sector': index, 'start': start, 'end': end, 'representative': complex(z),
                     'signs': ' '.join(str(int(s)) for s in fan.sign_patterns[index])})
    ctx.emit(fan.to_dict(), pd.DataFrame(rows))


def run_classify(ctx: CommandContext):
    bvp = ctx.load_system(ctx.args.document)
    settings = ctx.config['classifier']
    regularity = classify_regularity(bvp, settings)
    completeness = completeness_certificate(bvp, settings)
    report = {
        'regularity': regularity.to_dict(),
        'completeness': completeness.to_dict(),
        'dissipativity': dissipativity_check(bvp, settings).to_dict(),
        'riesz': riesz_verdict(bvp, settings).to_dict(),
        'synthesis': synthesis_verdict(bvp, completeness, settings).to_dict(),
    }
    summary = pd.DataFrame([
        {'field': 'regular', 'value': str(regularity.regular).lower()},
        {'field': 'weakly_regular', 'value': str(regularity.weakly_regular).lower()},
        {'field': 'degenerate', 'value': str(regularity.degenerate).lower()},
        {'field': 'completeness', 'value': completeness.status},
        {'field': 'rule', 'value': completeness.rule or ''},
        {'field': 'dissipativity', 'value': report['dissipativity']['verdict']},
        {'field': 'riesz', 'value': report['riesz']['verdict']},
        {'field': 'synthesis', 'value': report['synthesis']['verdict']},
    ])
    ctx.emit(report, summary)


def _grouping(ctx: CommandContext, bvp: DiracBVP, values) -> Optional[dict]:
    if ctx.args.group_eps is None:
        return None
    if ctx.args.angles:
        angles = parse_float_list(ctx.args.angles)
    else:
        angles = riesz_verdict(bvp, ctx.config['classifier']).angles
    return group_blocks(values, angles, ctx.args.group_eps).to_dict()


def run_spectrum(ctx: CommandContext):
    bvp = ctx.load_system(ctx.args.document)
    region = ctx.region()
    locator = SpectrumLocator(bvp, ctx.ctrl, ctx.config['spectrum'], ctx.propagator(bvp))
    spectrum = locator.locate(region, ctx.config['spectrum']['tol'])
    data = spectrum.to_dict()
    blocks = _grouping(ctx, bvp, spectrum.values())
    if blocks is not None:
        data['blocks'] = blocks
    ctx.emit(data, eigenvalue_table(spectrum.eigenvalues))


def _scan_points(ctx: CommandContext) -> np.ndarray:
    points = ctx.args.points
    if ctx.args.ray:
        values = parse_float_list(ctx.args.ray)
        if len(values) != 3 or values[2] <= values[1]:
            raise ValidationError("--ray must be angle,rmin,rmax with rmax > rmin")
        angle, r_min, r_max = values
        return np.linspace(r_min, r_max, points) * np.exp(1j * angle)
    region = ctx.region()
    xs = np.linspace(region.x0, region.x1, points)
    ys = np.linspace(region.y0, region.y1, points)
    return (xs[None, :] + 1j * ys[:, None]).ravel()


def run_detscan(ctx: CommandContext):
    bvp = ctx.load_system(ctx.args.document)
    propagator = ctx.propagator(bvp)
    lams = _scan_points(ctx)
    if ctx.args.scaled:
        fan = compute_fan(bvp.weight, ctx.config['sector'])
        models = build_sector_models(bvp, fan)
        values = np.array([scaled_determinant(bvp, lam, fan.sector_of(lam), models[fan.sector_of(lam)],
                                              propagator=propagator) for lam in lams])
    else:
        values = propagator.determinants(lams, ctx.config['spectrum']['max_workers'])
    frame = pd.DataFrame({'re_lambda': lams.real, 'im_lambda': lams.imag, 're_delta': values.real,
                          'im_delta': values.imag, 'abs_delta': np.abs(values)})
    ctx.emit({'scaled': bool(ctx.args.scaled), 'rows': frame.to_dict(orient='records')}, frame)


def run_asymptotics(ctx: CommandContext):
    bvp = ctx.load_system(ctx.args.document)
    propagator = ctx.propagator(bvp)
    radii = parse_float_list(ctx.args.radii)
    models = build_sector_models(bvp, compute_fan(bvp.weight, ctx.config['sector']))
    tables = []
    for model in models:
        table = ray_comparison(propagator, model, radii=radii)
        table.insert(0, 'sector', model.sector)
        tables.append(table)
    frame = pd.concat(tables, ignore_index=True)
    data = {'models': [model.to_dict() for model in models],
            'rays': frame.to_dict(orient='records')}
    ctx.emit(data, frame)


def run_rootfns(ctx: CommandContext):
    bvp = ctx.load_system(ctx.args.document)
    settings = ctx.config['root_functions']
    if ctx.args.probe:
        report = defect_probe(bvp, ctx.region(), n_test=ctx.args.n_test, grid=ctx.args.grid,
                              seed=settings['probe_seed'], settings=settings)
        frame = pd.DataFrame({'test_function': range(len(report.residuals)), 'residual': report.residuals})
        ctx.emit(report.to_dict(), frame)
        return

    system = root_chains(bvp, ctx.lam(), ctx.args.multiplicity, ctx.args.grid, settings, ctx.propagator(bvp))
    columns = {}
    x_grid = system.chains[0].x_grid if system.chains else np.zeros(0)
    columns['x'] = x_grid
    for c, chain in enumerate(system.chains):
        for p, u in enumerate(chain.functions):
            for j in range(bvp.n):
                columns[f'chain{c}_u{p}_y{j + 1}'] = u[:, j]
    data = system.to_dict()
    data['chain_residuals'] = [chain_residual(bvp, chain) for chain in system.chains]
    data['boundary_residuals'] = [boundary_residual(bvp, chain) for chain in system.chains]
    ctx.emit(data, pd.DataFrame(columns))


def run_green(ctx: CommandContext):
    bvp = ctx.load_system(ctx.args.document)
    lam = ctx.lam()
    settings = ctx.config['resolvent']
    if ctx.args.jump is not None:
        jump = green_jump(bvp, lam, ctx.args.jump, settings)
        rows = [{'i': i + 1, 'j': j + 1, 'value': complex(jump[i, j])}
                for i in range(bvp.n) for j in range(bvp.n)]
        ctx.emit({'lambda': lam, 'x': ctx.args.jump, 'jump': jump}, pd.DataFrame(rows))
        return

    if not ctx.args.at:
        raise ValidationError("green needs --at x,t (repeatable) or --jump x")
    pairs = []
    for text in ctx.args.at:
        values = parse_float_list(text)
        if len(values) != 2:
            raise ValidationError(f"--at expects x,t, got '{text}'")
        pairs.append(values)
    evaluation = green_function(bvp, lam, pairs, settings)
    rows = []
    for (x, t), G in zip(evaluation.pairs, evaluation.values):
        for i in range(bvp.n):
            for j in range(bvp.n):
                rows.append({'x': x, 't': t, 'i': i + 1, 'j': j + 1, 'value': complex(G[i, j])})
    ctx.emit(evaluation.to_dict(), pd.DataFrame(rows))


def run_svalues(ctx: CommandContext):
    bvp = ctx.load_system(ctx.args.document)
    profile = svalue_profile(bvp, ctx.lam(), ctx.args.size, ctx.args.count, ctx.config['resolvent'])
    ctx.emit(profile.to_dict(), profile.table())


def run_trace_diff(ctx: CommandContext):
    settings = ctx.config['resolvent']
    lam = ctx.lam()
    first = ctx.load_system(ctx.args.document)
    if ctx.args.dissipation_sum:
        diagnostic = dissipation_sum_diagnostic(first, lam, ctx.region(), ctx.args.grid, settings)
        ctx.emit(diagnostic.to_dict(), pd.DataFrame([diagnostic.to_dict()]).drop(columns=['note']))
        return

    if not ctx.args.second:
        raise ValidationError("trace-diff needs a second document unless --dissipation-sum is given")
    second = ctx.load_system(ctx.args.second)
    formula = trace_formula_diff(first, second, lam, ctx.args.grid, settings)
    data = {'lambda': lam, 'formula': formula}
    if ctx.args.size is not None:
        data['kernel_trace'] = kernel_trace_difference(first, second, lam, ctx.args.size, settings)
        data['gap'] = abs(data['kernel_trace'] - formula)
    ctx.emit(data, pd.DataFrame([data]))


def run_gauge(ctx: CommandContext):
    bvp = ctx.load_system(ctx.args.document)
    normalized, record = gauge_normalize(bvp, ctx.config['propagator'])
    if ctx.args.emit_system:
        ctx.emit(system_to_dict(normalized))
        return
    ctx.emit({'system': system_to_dict(normalized), 'gauge': record.to_dict()})


def run_timoshenko(ctx: CommandContext):
    beam = ctx.load(ctx.args.document)
    if not isinstance(beam, BeamModel):
        raise ValidationError(f"{ctx.args.document} is not a beam document")
    settings = ctx.config['timoshenko']
    report = validate_beam(beam, settings)
    if not report.is_valid:
        raise ValidationError("; ".join(report.violations))
    reduction = reduce_to_dirac(beam, settings)

    if ctx.args.emit_dirac:
        ctx.emit(system_to_dict(reduction.dirac))
        return

    data = {'reduction': {key: value for key, value in reduction.to_dict().items() if key != 'dirac'}}
    frame = None
    if ctx.args.conditions or not (ctx.args.spectrum or ctx.args.oracle):
        conditions = beam_conditions(beam, reduction, settings)
        data['conditions'] = conditions.to_dict()
        frame = pd.DataFrame([{'field': key, 'value': str(value)} for key, value in data['conditions'].items()
                              if not isinstance(value, (dict, list))])

    computed = None
    if ctx.args.spectrum:
        region = ctx.region()
        locator = SpectrumLocator(reduction.dirac, ctx.ctrl, ctx.config['spectrum'], ctx.propagator(reduction.dirac))
        computed = locator.locate(region, ctx.config['spectrum']['tol'])
        data['spectrum'] = computed.to_dict()
        frame = eigenvalue_table(computed.eigenvalues)

    if ctx.args.oracle:
        start, stop = (int(v) for v in parse_float_list(ctx.args.indices))
        indices = list(range(start, stop + 1))
        rows = []
        for family in (1, 2):
            lattice = decoupled_oracle(reduction, family, indices)
            for k, point in zip(indices, lattice):
                row = {'family': family, 'k': k, 'oracle': complex(point)}
                if computed is not None and computed.eigenvalues:
                    values = computed.values()
                    nearest = values[int(np.argmin(np.abs(values - point)))]
                    row['nearest'] = complex(nearest)
                    row['distance'] = float(abs(nearest - point))
                rows.append(row)
        data['oracle'] = rows
        frame = pd.DataFrame(rows)

    ctx.emit(data, frame)


HANDLERS = {
    'fan': run_fan,
    'classify': run_classify,
    'spectrum': run_spectrum,
    'detscan': run_detscan,
    'asymptotics': run_asymptotics,
    'rootfns': run_rootfns,
    'green': run_green,
    'svalues': run_svalues,
    'trace-diff': run_trace_diff,
    'gauge': run_gauge,
    'timoshenko': run_timoshenko,
}


# ----------------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------------

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="Root step tolerance for eigenvalue refinement.")
    common.add_argument("--steps", type=int, default=None, help="Propagator base steps per unit length (>= 16).")
    common.add_argument("--grid", type=int, default=None, help="Grid cells for root functions and traces (even).")
    common.add_argument("--region", type=str, default=None, help="Search rectangle x0,x1,y0,y1.")
    common.add_argument("--lambda", dest="lam", type=str, default=None, help="Spectral parameter, e.g. 2+1j.")
    common.add_argument("--seed", type=int, default=None, help="Seed for random test functions (default 0).")
    common.add_argument("--format", choices=["json", "csv"], default="json", help="Output format.")
    common.add_argument("--out", type=str, default=None, help="Output file (default stdout).")
    common.add_argument("--profile", choices=["default", "production", "development"], default="default",
                        help="Configuration profile.")
    common.add_argument("--verbose", action="store_true", help="Log progress to stderr.")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="cli.py",
        description="Spectral analysis of first-order systems -i B^{-1} y' + Q y = lambda y on [0, 1].",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fan", parents=[common], help="Separating lines and sectors of B.")
    p.add_argument("document")

    p = sub.add_parser("classify", parents=[common], help="Regularity, completeness and basis verdicts.")
    p.add_argument("document")

    p = sub.add_parser("spectrum", parents=[common], help="Eigenvalues with multiplicities in a rectangle.")
    p.add_argument("document")
    p.add_argument("--group-eps", dest="group_eps", type=float, default=None, help="Block grouping threshold.")
    p.add_argument("--angles", type=str, default=None, help="Ray angles a1,a2,... for grouping.")

    p = sub.add_parser("detscan", parents=[common], help="Sample Delta on a rectangle or a ray.")
    p.add_argument("document")
    p.add_argument("--ray", type=str, default=None, help="angle,rmin,rmax instead of --region.")
    p.add_argument("--points", type=int, default=21, help="Samples per side or along the ray.")
    p.add_argument("--scaled", action="store_true", help="Divide by the sector model growth.")

    p = sub.add_parser("asymptotics", parents=[common], help="Sector models and ray comparison.")
    p.add_argument("document")
    p.add_argument("--radii", type=str, default="10,20,40,80", help="|lambda| ladder.")

    p = sub.add_parser("rootfns", parents=[common], help="Root function chains at an eigenvalue.")
    p.add_argument("document")
    p.add_argument("--multiplicity", type=int, default=1)
    p.add_argument("--probe", action="store_true", help="Run the completeness defect probe on --region.")
    p.add_argument("--n-test", dest="n_test", type=int, default=8, help="Test functions for --probe.")

    p = sub.add_parser("green", parents=[common], help="Green's function values.")
    p.add_argument("document")
    p.add_argument("--at", action="append", default=None, help="Point x,t (repeatable).")
    p.add_argument("--jump", type=float, default=None, help="Report G(x, x-0) - G(x, x+0).")

    p = sub.add_parser("svalues", parents=[common], help="Singular values of the discretized resolvent.")
    p.add_argument("document")
    p.add_argument("--N", dest="size", type=int, default=2048, help="Nystrom grid cells.")
    p.add_argument("--count", type=int, default=None, help="Number of s-values.")

    p = sub.add_parser("trace-diff", parents=[common], help="Trace of a resolvent difference.")
    p.add_argument("document")
    p.add_argument("second", nargs="?", default=None)
    p.add_argument("--N", dest="size", type=int, default=None, help="Also compute the Nystrom trace.")
    p.add_argument("--dissipation-sum", dest="dissipation_sum", action="store_true",
                   help="Compare the eigenvalue sum in --region with the trace against the adjoint.")

    p = sub.add_parser("gauge", parents=[common], help="Remove the diagonal blocks of Q.")
    p.add_argument("document")
    p.add_argument("--emit-system", dest="emit_system", action="store_true",
                   help="Write only the normalized system document.")

    p = sub.add_parser("timoshenko", parents=[common], help="Beam reduction, conditions and spectrum.")
    p.add_argument("document")
    p.add_argument("--emit-dirac", dest="emit_dirac", action="store_true", help="Write the reduced system.")
    p.add_argument("--conditions", action="store_true", help="Evaluate the explicit beam conditions.")
    p.add_argument("--spectrum", action="store_true", help="Locate eigenvalues in --region.")
    p.add_argument("--oracle", action="store_true", help="List the decoupled lattices.")
    p.add_argument("--indices", type=str, default="1,10", help="k range first,last for --oracle.")

    return parser


def attach_negative_values(argv: List[str]) -> List[str]:
    """Join numeric list options with a leading-minus value into --option=value"""
    joined = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in NUMERIC_LIST_OPTIONS and i + 1 < len(argv) and NEGATIVE_VALUE.match(argv[i + 1]):
            joined.append(f"{token}={argv[i + 1]}")
            i += 2
            continue
        joined.append(token)
        i += 1
    return joined


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and not argv[0].startswith('-') and argv[0] not in SUBCOMMANDS:
        sys.stderr.write(f"unknown subcommand '{argv[0]}'; choose from {', '.join(SUBCOMMANDS)}\n")
        return 1

    parser = build_parser()
    try:
        args = parser.parse_args(attach_negative_values(argv))
    except SystemExit as e:
        return int(e.code or 0)

    try:
        ctx = CommandContext(args)
    except (ValueError, ValidationError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2

    level = 'INFO' if args.verbose else ctx.config['monitoring']['log_level']
    logging.basicConfig(level=getattr(logging, level), format="%(levelname)s %(message)s", stream=sys.stderr)

    started = time.time()
    try:
        HANDLERS[args.command](ctx)
    except ValidationError as e:
        sys.stderr.write(f"validation error: {e}\n")
        return 2
    except NumericalError as e:
        sys.stderr.write(f"numerical error: {e}\n")
        return 3
    except ValueError as e:
        sys.stderr.write(f"validation error: {e}\n")
        return 2
    if ctx.config['monitoring']['enable_performance_logging']:
        logging.info(f"{args.command} finished in {time.time() - started:.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
