import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from src.config import Config
from src.services.hermitian import (
    SIMPLE_KINDS,
    TWO_LEVEL_KINDS,
    SpectrumKind,
    SpectrumSpec,
    assemble,
    random_spectrum,
    spectrum_eigenvalues,
)
from src.services.manifolds import GrassmannPoint, grassmann_matrix, grassmann_projection, stiefel_frame, stiefel_projection
from src.services.parameterization import ParamSet, Scheme, SchemeTag, compose, factorize, param_count, random_params
from src.services.verification import SUITES, run_suite
from src.utils.document_parser import DocumentParser, MatrixDocument, SpectrumPayload, build_document, dumps_document
from src.utils.errors import (
    ContractionError,
    ConvergenceError,
    FactorizationError,
    FlagFrameError,
    NotHermitianError,
    NotPositiveSemidefiniteError,
    NotUnitaryError,
    SchemeError,
)
from src.utils.helpers import create_report_dataframe, create_spectrum_dataframe

logger = logging.getLogger("flagframe")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
DOMAIN_ERRORS = (NotUnitaryError, FactorizationError, NotHermitianError, NotPositiveSemidefiniteError,
                 ContractionError, ConvergenceError)


def _parse_floats(raw: Optional[str]) -> Optional[List[float]]:
    if raw is None:
        return None
    try:
        return [float(x) for x in raw.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected a comma-separated list of numbers, got {raw!r}")


def _frame_params(scheme: Scheme, values: Optional[Sequence[float]], rng: np.random.Generator) -> ParamSet:
    return ParamSet.from_flat(scheme, values) if values is not None else random_params(scheme, rng)


def generate_matrix_document(
    scheme: str,
    n: int,
    k: Optional[int],
    seed: int,
    as_object: Optional[str] = None,
    values: Optional[Sequence[float]] = None,
) -> MatrixDocument:
    rng = np.random.default_rng(seed)
    tag = SchemeTag(scheme)

    if tag == SchemeTag.GRASSMANN:
        base = Scheme(tag, n, min(k, n - k))
        point = GrassmannPoint(n, k, _frame_params(base, values, rng))
        target = as_object or ("projection" if point.complemented else "unitary")
        if target == "projection":
            return build_document("projection", grassmann_projection(point), point.params, seed, rank=k)
        matrix = grassmann_matrix(point)
        if target == "isometry":
            return build_document("isometry", matrix[:, :k], point.params, seed, rank=k)
        return build_document("unitary", matrix, point.params, seed, rank=k)

    params = _frame_params(Scheme(tag, n, k), values, rng)
    target = as_object or "unitary"
    if tag in (SchemeTag.STIEFEL_REDUCED, SchemeTag.STIEFEL_FULL):
        if target == "unitary":
            return build_document("unitary", compose(params), params, seed, rank=k)
        frame = stiefel_frame(params)
        if target == "isometry":
            return build_document("isometry", frame.matrix, params, seed, rank=k)
        return build_document("projection", stiefel_projection(frame), params, seed, rank=k)

    matrix = compose(params)
    if target == "unitary":
        return build_document("unitary", matrix, params, seed)
    if k is None:
        raise SchemeError(f"--as {target} needs --k for the {tag.value} scheme.")
    columns = matrix[:, :k]
    if target == "isometry":
        return build_document("isometry", columns, params, seed, rank=k)
    return build_document("projection", columns @ columns.conj().T, params, seed, rank=k)


def build_spectrum(args: argparse.Namespace, rng: np.random.Generator) -> SpectrumSpec:
    kind = SpectrumKind(args.kind)
    angles = _parse_floats(args.angles)
    if angles is None and args.theta is not None:
        angles = [args.theta]
    if angles is None:
        return random_spectrum(kind, args.n, rng, h=args.h, p=args.p, k=args.k, normalize=args.normalize,
                               theta_hyp=args.theta_hyp)
    theta_hyp = args.theta_hyp if args.theta_hyp is not None else 0.0
    return SpectrumSpec(n=args.n, kind=kind, h=args.h, p=args.p, k=args.k, angles=tuple(angles),
                        theta_hyp=theta_hyp, normalize=args.normalize)


def generate_hermitian_document(args: argparse.Namespace, seed: int) -> MatrixDocument:
    rng = np.random.default_rng(seed)
    spec = build_spectrum(args, rng)
    if spec.kind in SIMPLE_KINDS:
        frame_scheme = Scheme(SchemeTag.FLAG, spec.n)
    elif spec.kind == SpectrumKind.DEGENERATE_K:
        frame_scheme = Scheme(SchemeTag.STIEFEL_REDUCED, spec.n, spec.k)
    else:
        frame_scheme = Scheme(SchemeTag.GRASSMANN, spec.n, min(spec.k, spec.n - spec.k))
    operator = assemble(spec, random_params(frame_scheme, rng))

    payload = SpectrumPayload(
        kind=spec.kind.value, n=spec.n, h=spec.h, p=spec.p, k=spec.k, angles=list(spec.angles),
        theta_hyp=spec.theta_hyp, normalize=spec.normalize, eigenvalues=list(operator.eigenvalues),
    )
    rank = spec.k if spec.kind in TWO_LEVEL_KINDS else None
    return build_document("hermitian", operator.matrix, operator.frame_params, seed, rank=rank, spectrum=payload)


def _emit_document(doc: MatrixDocument, out: Optional[str], index: Optional[int] = None) -> None:
    if out is None:
        sys.stdout.write(dumps_document(doc))
        return
    path = Path(out)
    if index is not None:
        path = path.with_name(f"{path.stem}-{index}{path.suffix}")
    DocumentParser().save(doc, path)
    print(f"Wrote {doc.kind} document ({doc.rows}x{doc.cols}) to {path}")


def cmd_generate(args: argparse.Namespace) -> int:
    if args.object == "hermitian":
        if args.kind is None or args.n is None:
            print("generate hermitian needs --kind and --n", file=sys.stderr)
            return EXIT_USAGE
    else:
        is_valid, message = Config.validate_dimensions(args.scheme, args.n, args.k)
        if not is_valid:
            print(f"Invalid dimensions: {message}", file=sys.stderr)
            return EXIT_USAGE

    values = _parse_floats(args.params)
    for i in range(args.count):
        seed = args.seed + i
        if args.object == "hermitian":
            doc = generate_hermitian_document(args, seed)
        else:
            doc = generate_matrix_document(args.scheme, args.n, args.k, seed, args.as_object, values)
        _emit_document(doc, args.out, i if args.count > 1 else None)
    return EXIT_OK


def cmd_factorize(args: argparse.Namespace) -> int:
    doc = DocumentParser().load(args.input, validate=args.validate)
    try:
        params = factorize(doc.to_matrix(), args.scheme, args.k)
    except (SchemeError,) + DOMAIN_ERRORS as e:
        print(f"Factorization failed: {e}", file=sys.stderr)
        return EXIT_FAILED

    columns = doc.cols if params.scheme.k is None else params.scheme.k
    result = build_document("params", compose(params)[:, :columns], params, doc.meta.seed, rank=params.scheme.k)
    _emit_document(result, args.out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    doc = DocumentParser().load(args.input, validate=args.validate)
    options = {
        "k": args.k if args.k is not None else doc.meta.rank,
        "scheme": args.scheme or (doc.params.scheme if doc.params is not None else None),
        "p_coef": args.p_coef,
        "q_coef": args.q_coef,
    }
    if doc.meta.spectrum is not None:
        options["eigenvalues"] = doc.meta.spectrum.eigenvalues
    if options["scheme"] == SchemeTag.GRASSMANN.value and args.suite == "round-trip":
        options["scheme"] = SchemeTag.FULL_UNITARY.value

    report = run_suite(args.suite, doc.to_matrix(), tol=args.tol, **options)
    print(f"--- Verification suite: {report.suite} ---")
    print(report.to_frame().to_string(index=False))
    for name, value in report.metrics.items():
        print(f"{name}: {value}")
    print("PASS" if report.passed else "FAIL")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_spectrum(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    spec = build_spectrum(args, rng)
    values = spectrum_eigenvalues(spec)
    print(f"--- Spectrum: {spec.kind.value}, n={spec.n}, h={spec.h} ---")
    print(create_spectrum_dataframe(values).to_string(index=False))
    print(f"angles: {', '.join(f'{a:.17g}' for a in spec.angles) or '-'}")
    print(f"trace: {float(np.sum(values)):.17g}")
    return EXIT_OK


def param_count_table(n: int, k: Optional[int] = None) -> pd.DataFrame:
    rows = []
    for tag in SchemeTag:
        if tag in (SchemeTag.FULL_UNITARY, SchemeTag.FLAG, SchemeTag.SPECIAL_ORTHOGONAL):
            ks: List[Optional[int]] = [None]
        elif tag == SchemeTag.GRASSMANN:
            ks = list(range(1, n))
        else:
            ks = list(range(1, n + 1))
        if k is not None and ks != [None]:
            ks = [x for x in ks if x == k]
        for kk in ks:
            # Gr(k, n) with k > n/2 is counted through its complement
            scheme = Scheme(tag, n, min(kk, n - kk) if tag == SchemeTag.GRASSMANN else kk)
            rows.append({"scheme": tag.value, "n": n, "k": kk if kk is not None else "-", "parameters": param_count(scheme)})
    return create_report_dataframe(rows)


def cmd_dim(args: argparse.Namespace) -> int:
    if args.n is None or args.n < 1:
        print("dim needs a positive --n", file=sys.stderr)
        return EXIT_USAGE
    print(param_count_table(args.n, args.k).to_string(index=False))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flagframe", description="Unitary, flag, Stiefel and Grassmann parameterizations.")
    parser.add_argument("--verbose", action="store_true", help="log progress at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    spectrum_flags = argparse.ArgumentParser(add_help=False)
    spectrum_flags.add_argument("--kind", choices=[k.value for k in SpectrumKind])
    spectrum_flags.add_argument("--h", type=float, default=1.0)
    spectrum_flags.add_argument("--p", type=int)
    spectrum_flags.add_argument("--theta", type=float, help="single cascade angle (two-level spectra)")
    spectrum_flags.add_argument("--theta-hyp", dest="theta_hyp", type=float)
    spectrum_flags.add_argument("--angles", help="comma-separated cascade angles")
    spectrum_flags.add_argument("--normalize", action="store_true")

    generate = commands.add_parser("generate", parents=[spectrum_flags], help="build a matrix or Hermitian operator")
    generate.add_argument("object", nargs="?", choices=["matrix", "hermitian"], default="matrix")
    generate.add_argument("--scheme", choices=Config.SUPPORTED_SCHEMES, default="flag")
    generate.add_argument("--n", type=int)
    generate.add_argument("--k", type=int)
    generate.add_argument("--seed", type=int, default=Config.DEFAULT_SEED)
    generate.add_argument("--params", help="explicit comma-separated parameters, factor-major, angles before phases")
    generate.add_argument("--as", dest="as_object", choices=["unitary", "projection", "isometry"])
    generate.add_argument("--count", type=int, default=1)
    generate.add_argument("--out")
    generate.set_defaults(handler=cmd_generate)

    fact = commands.add_parser("factorize", help="recover parameters from a unitary document")
    fact.add_argument("--in", dest="input", required=True)
    fact.add_argument("--scheme", choices=[t.value for t in SchemeTag if t != SchemeTag.GRASSMANN], default="full")
    fact.add_argument("--k", type=int)
    fact.add_argument("--validate", action="store_true")
    fact.add_argument("--out")
    fact.set_defaults(handler=cmd_factorize)

    verify = commands.add_parser("verify", help="run a verification suite on a document")
    verify.add_argument("--in", dest="input", required=True)
    verify.add_argument("--suite", choices=list(SUITES), required=True)
    verify.add_argument("--tol", type=float, default=Config.VERIFY_TOL)
    verify.add_argument("--scheme", choices=Config.SUPPORTED_SCHEMES)
    verify.add_argument("--k", type=int)
    verify.add_argument("--p-coef", dest="p_coef", type=float)
    verify.add_argument("--q-coef", dest="q_coef", type=float)
    verify.add_argument("--validate", action="store_true")
    verify.set_defaults(handler=cmd_verify)

    spectrum = commands.add_parser("spectrum", parents=[spectrum_flags], help="print an eigenvalue cascade")
    spectrum.add_argument("--n", type=int, required=True)
    spectrum.add_argument("--k", type=int)
    spectrum.add_argument("--seed", type=int, default=Config.DEFAULT_SEED)
    spectrum.set_defaults(handler=cmd_spectrum, kind_required=True)

    dim = commands.add_parser("dim", help="tabulate parameter counts")
    dim.add_argument("--n", type=int, required=True)
    dim.add_argument("--k", type=int)
    dim.set_defaults(handler=cmd_dim)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else Config.LOG_LEVEL,
        format="%(levelname)s: %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if getattr(args, "kind_required", False) and args.kind is None:
        parser.error("spectrum needs --kind")
    if getattr(args, "count", 1) < 1:
        parser.error("--count must be at least 1")
    logger.debug("Numeric settings: %s", Config.get_numeric_settings())

    try:
        return args.handler(args)
    except DOMAIN_ERRORS as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_FAILED
    except (FlagFrameError, ValueError, argparse.ArgumentTypeError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
