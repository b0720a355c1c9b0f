#!/usr/bin/env python3
"""
Command-line surface: plan, estimate, compare, symmetry, nodes, oracle
"""
import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from bounds import (ABSOLUTE_THEOREMS, THEOREMS, PlanRequest, epsilon_from_relative_target, plan,
                    plan_optimized)
from diagnostics import CASES, run_appendix_cases
from errors import (EXIT_OK, InvalidInputError, OracleTooLargeError, PreconditionError, SLQError,
                    exit_code_for)
from input_validation import InputValidator, load_config
from lanczos import lanczos
from operators import (SpectrumBounds, build_operator, estimate_spectrum_bounds,
                       exact_spectrum_bounds)
from quadrature import AffineMap, pushforward_rule
from slq import (CSV_HEADER, SlqConfig, attach_exact, estimate_with_plan, query_generator,
                 rademacher_unit_vector, slq_estimate)
from svg_report import SVGExporter
from tridiag_eig import exact_logdet

logger = logging.getLogger(__name__)

LOG_FILE = 'slq_logdet.log'
COMPARE_HEADER = ('eps_star', 'theorem', 'm', 'N', 'mvm')
NODES_HEADER = ('k', 'theta', 'tau')
DEFAULT_COMPARE_THEOREMS = 'corrected_absolute,relative,optimized'


def setup_logging(log_dir: str, verbose: bool = False, quiet: bool = False) -> None:
    """File log under log_dir plus stderr; stdout stays reserved for records"""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    Path(log_dir).mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(Path(log_dir) / LOG_FILE),
            logging.StreamHandler(sys.stderr),
        ],
        force=True,
    )


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f'{value:.17g}'
    return '' if value is None else str(value)


def _print_record(record: Dict[str, Any], as_json: bool) -> None:
    if as_json:
        print(json.dumps(record, indent=2))
        return
    width = max(len(key) for key in record)
    for key, value in record.items():
        print(f"{key:<{width}} : {_fmt(value)}")


def _write_csv(path: Path, header, rows: List[List[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)
    logger.info(f"Wrote {len(rows)} row(s) to {path}")


def _operator_bounds(A, config: Dict[str, Any], seed: int) -> SpectrumBounds:
    bounds = exact_spectrum_bounds(A)
    if bounds is None:
        spectrum = config['spectrum']
        bounds = estimate_spectrum_bounds(A, spectrum['probe_steps'], spectrum['safety'], seed)
    return bounds


def _try_exact(A, cap: int) -> Optional[float]:
    try:
        return exact_logdet(A, cap)
    except OracleTooLargeError as e:
        logger.info(f"Exact logdet unavailable: {e}")
        return None


def cmd_plan(args, config) -> int:
    bounds = SpectrumBounds(InputValidator.validate_positive_real(args.lambda_min, 'lambda-min'),
                            InputValidator.validate_positive_real(args.lambda_max, 'lambda-max'),
                            InputValidator.validate_positive_int(args.n, 'n'))
    req = PlanRequest(bounds, args.eps, args.eta, args.theorem)
    if args.alpha is not None:
        if args.theorem != 'optimized':
            raise InvalidInputError("--alpha applies to the optimized plan only")
        result = plan_optimized(req, alpha=args.alpha, include_n=args.include_n)
    else:
        result = plan(req, include_n=args.include_n)

    record = result.to_record()
    if args.theorem != 'optimized':
        record.pop('alpha_star')
        record.pop('C')
    _print_record(record, args.json)
    return EXIT_OK


def cmd_estimate(args, config) -> int:
    cap = config['oracle']['max_dense_dim']
    A = build_operator(args.matrix, dense_cap=cap)
    seed = config['slq']['seed'] if args.seed is None else args.seed
    batch_size = config['slq']['batch_size']
    reorthogonalize = config['lanczos']['reorthogonalize'] and not args.no_reorth

    if args.auto:
        bounds = _operator_bounds(A, config, seed)
        result = estimate_with_plan(A, bounds, args.eps, args.eta, args.theorem, rescale=args.rescale,
                                    seed=seed, reorthogonalize=reorthogonalize, batch_size=batch_size,
                                    headroom=config['spectrum']['headroom'], include_n=args.include_n)
    elif args.m is not None and args.N is not None:
        cfg = SlqConfig(m=args.m, N=args.N, seed=seed, reorthogonalize=reorthogonalize,
                        batch_size=batch_size, breakdown_tol=config['lanczos']['breakdown_tol'])
        result = slq_estimate(A, cfg)
    else:
        raise InvalidInputError("estimate needs either --m and --N or --auto")

    exact = _try_exact(A, cap)
    if exact is not None:
        result = attach_exact(result, exact)

    record = result.to_record()
    record.pop('per_query')
    _print_record(record, args.json)
    if args.csv:
        _write_csv(Path(args.csv), CSV_HEADER, [result.csv_row()])
    return EXIT_OK


def _eps_star_grid(lo: float, hi: float, step: float) -> List[float]:
    count = int(round((hi - lo) / step)) + 1
    grid = [round(lo + i * step, 12) for i in range(count)]
    return [eps for eps in grid if eps <= hi + 1e-12]


def cmd_compare(args, config) -> int:
    sweep = config['sweep']
    cap = config['oracle']['max_dense_dim']
    lo = InputValidator.validate_open_unit(sweep['eps_star_min'] if args.eps_star_min is None
                                           else args.eps_star_min, 'eps-star-min')
    hi = InputValidator.validate_open_unit(sweep['eps_star_max'] if args.eps_star_max is None
                                           else args.eps_star_max, 'eps-star-max')
    step = InputValidator.validate_positive_real(sweep['eps_star_step'] if args.eps_star_step is None
                                                 else args.eps_star_step, 'eps-star-step')
    eta = InputValidator.validate_open_unit(sweep['eta'] if args.eta is None else args.eta, 'eta')
    if lo > hi:
        raise InvalidInputError("eps-star-min must not exceed eps-star-max")
    theorems = [t.strip() for t in args.theorems.split(',') if t.strip()]
    unknown = [t for t in theorems if t not in THEOREMS]
    if not theorems or unknown:
        raise InvalidInputError(f"--theorems must name plans from {THEOREMS}, got {args.theorems!r}")

    A = build_operator(args.matrix, dense_cap=cap)
    seed = config['slq']['seed'] if args.seed is None else args.seed
    bounds = _operator_bounds(A, config, seed)
    relative_bounds = bounds
    if bounds.lambda_max >= 1.0:
        relative_bounds = bounds.scaled(config['spectrum']['headroom'] / bounds.lambda_max)
        logger.info("Relative plans use the spectrum rescaled below 1")

    logdet = args.logdet
    absolute = [t for t in theorems if t in ABSOLUTE_THEOREMS]
    if absolute and logdet is None:
        logdet = _try_exact(A, cap if args.cap is None else args.cap)
        if logdet is None:
            theorems = [t for t in theorems if t not in ABSOLUTE_THEOREMS]
            for theorem in absolute:
                print(f"⚠️  {theorem} skipped: no exact logdet (pass --logdet)", file=sys.stderr)
                logger.warning(f"{theorem} series skipped: exact logdet unavailable")
            if not theorems:
                raise PreconditionError("no plan left to compare: absolute plans need --logdet")

    grid = _eps_star_grid(lo, hi, step)
    rows: List[List[str]] = []
    series: Dict[str, List] = {t: [] for t in theorems}
    for eps_star in grid:
        for theorem in theorems:
            if theorem in ('relative', 'optimized'):
                req = PlanRequest(relative_bounds, eps_star, eta, theorem)
            else:
                eps = epsilon_from_relative_target(eps_star, logdet, A.dim)
                req = PlanRequest(bounds, eps, eta, theorem)
            result = plan(req)
            rows.append([f'{eps_star:.12g}', theorem, str(result.m), str(result.N), str(result.mvm_total)])
            series[theorem].append((eps_star, result.mvm_total))

    output_dir = Path(args.output_dir or config['paths']['output_dir'])
    csv_path = Path(args.csv) if args.csv else output_dir / 'compare.csv'
    svg_path = Path(args.svg) if args.svg else output_dir / 'compare.svg'
    _write_csv(csv_path, COMPARE_HEADER, rows)
    SVGExporter().generate_line_chart(series, svg_path, title=f"MVMs vs relative error ({args.matrix})",
                                      x_label='eps*', y_label='matrix-vector products', log_y=True)
    print(f"📊 {len(rows)} rows -> {csv_path}, chart -> {svg_path}")
    return EXIT_OK


def cmd_symmetry(args, config) -> int:
    diag = config['diagnostics']
    m = diag['default_m'] if args.m is None else InputValidator.validate_positive_int(args.m, 'm')
    cases = CASES if args.case == 'all' else (int(args.case),)
    nd3k = args.nd3k or config['paths']['nd3k_matrix']
    output_dir = Path(args.output_dir or config['paths']['output_dir'])

    reports = run_appendix_cases(m, output_dir, nd3k, cases=cases, tol=diag['symmetry_tol'],
                                 cap=config['oracle']['max_dense_dim'], grid_points=diag['grid_points'])
    if 4 in cases and not any(r.case == 4 for r in reports):
        print("⏭️  Case 4 skipped: set SLQ_ND3K_PATH or --nd3k to the matrix file")
    for report in reports:
        marker = '✅' if report.verdict == 'symmetric' else '⚠️ '
        print(f"{marker} {report.summary()}")
    return EXIT_OK


def cmd_nodes(args, config) -> int:
    cap = config['oracle']['max_dense_dim']
    A = build_operator(args.matrix, dense_cap=cap)
    seed = config['slq']['seed'] if args.seed is None else args.seed
    m = min(InputValidator.validate_positive_int(args.m, 'm'), A.dim - 1)
    v = rademacher_unit_vector(A.dim, query_generator(seed, 0))
    rule = lanczos(A, v, m, reorthogonalize=config['lanczos']['reorthogonalize'],
                   breakdown_tol=config['lanczos']['breakdown_tol']).rule

    if args.reference:
        bounds = _operator_bounds(A, config, seed)
        if bounds.lambda_max > bounds.lambda_min:
            h = AffineMap.from_interval(bounds.lambda_min, bounds.lambda_max)
        else:
            # c*I: the single node maps to the center of [-1, 1]
            h = AffineMap(1.0, bounds.lambda_min)
            logger.info("Degenerate spectrum: reference nodes shifted to 0")
        rule = pushforward_rule(rule, h)

    rows = [[str(k), _fmt(float(theta)), _fmt(float(tau))]
            for k, (theta, tau) in enumerate(zip(rule.nodes, rule.weights), start=1)]
    if args.csv:
        _write_csv(Path(args.csv), NODES_HEADER, rows)
    else:
        writer = csv.writer(sys.stdout, lineterminator='\n')
        writer.writerow(NODES_HEADER)
        writer.writerows(rows)
    return EXIT_OK


def cmd_oracle(args, config) -> int:
    cap = config['oracle']['max_dense_dim'] if args.cap is None else args.cap
    A = build_operator(args.matrix, dense_cap=cap)
    logdet = exact_logdet(A, cap)
    _print_record({'matrix': args.matrix, 'n': A.dim, 'logdet': logdet}, args.json)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='SLQ log-determinant estimation toolkit')
    parser.add_argument('--config', type=str, help='Path to config.json (default: $SLQ_CONFIG or ./config.json)')
    parser.add_argument('--output-dir', type=str, help='Directory for CSV and SVG artifacts')
    parser.add_argument('--verbose', action='store_true', help='Debug logging')
    parser.add_argument('--quiet', action='store_true', help='Warnings and errors only')
    parser.add_argument('--json', action='store_true', help='Print records as JSON')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('plan', help='Compute a certified (m, N) plan')
    p.add_argument('--theorem', choices=THEOREMS, required=True)
    p.add_argument('--lambda-min', type=float, required=True)
    p.add_argument('--lambda-max', type=float, required=True)
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--eps', type=float, required=True)
    p.add_argument('--eta', type=float, required=True)
    p.add_argument('--alpha', type=float, help='Force the error split of the optimized plan')
    p.add_argument('--include-n', action='store_true', help='Keep the factor n inside the optimized m bound')
    p.set_defaults(handler=cmd_plan)

    p = sub.add_parser('estimate', help='Run an SLQ log-determinant estimate')
    p.add_argument('--matrix', required=True, help='Operator spec, e.g. decay:n=500,r=0.5,scale=0.99')
    p.add_argument('--m', type=int)
    p.add_argument('--N', type=int)
    p.add_argument('--auto', action='store_true', help='Choose (m, N) from --theorem, --eps and --eta')
    p.add_argument('--theorem', choices=THEOREMS, default='relative')
    p.add_argument('--eps', type=float, default=0.1)
    p.add_argument('--eta', type=float, default=0.1)
    p.add_argument('--rescale', action='store_true', help='Scale lambda_max below 1 for relative plans')
    p.add_argument('--include-n', action='store_true')
    p.add_argument('--no-reorth', action='store_true', help='Disable full reorthogonalization')
    p.add_argument('--seed', type=int)
    p.add_argument('--csv', type=str, help='Write a one-row CSV record')
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser('compare', help='Sweep eps* and compare MVM totals per plan')
    p.add_argument('--matrix', required=True)
    p.add_argument('--theorems', default=DEFAULT_COMPARE_THEOREMS)
    p.add_argument('--eps-star-min', type=float)
    p.add_argument('--eps-star-max', type=float)
    p.add_argument('--eps-star-step', type=float)
    p.add_argument('--eta', type=float)
    p.add_argument('--logdet', type=float, help='Known logdet for the absolute-plan conversion')
    p.add_argument('--cap', type=int, help='Oracle dimension cap for the exact logdet')
    p.add_argument('--seed', type=int)
    p.add_argument('--csv', type=str)
    p.add_argument('--svg', type=str)
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser('symmetry', help='Ritz value symmetry report for the four test cases')
    p.add_argument('--case', choices=[str(c) for c in CASES] + ['all'], default='all')
    p.add_argument('--m', type=int)
    p.add_argument('--nd3k', type=str, help='Matrix Market file for case 4')
    p.set_defaults(handler=cmd_symmetry)

    p = sub.add_parser('nodes', help='Quadrature nodes and weights of one Rademacher query')
    p.add_argument('--matrix', required=True)
    p.add_argument('--m', type=int, required=True)
    p.add_argument('--seed', type=int)
    p.add_argument('--reference', action='store_true', help='Map nodes to [-1, 1]')
    p.add_argument('--csv', type=str)
    p.set_defaults(handler=cmd_nodes)

    p = sub.add_parser('oracle', help='Exact logdet from the eigenvalues')
    p.add_argument('--matrix', required=True)
    p.add_argument('--cap', type=int, help='Dense oracle dimension cap')
    p.set_defaults(handler=cmd_oracle)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI interface"""
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        setup_logging(config['paths']['log_dir'], args.verbose, args.quiet)
        return args.handler(args, config)
    except SLQError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"❌ {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == '__main__':
    sys.exit(main())
