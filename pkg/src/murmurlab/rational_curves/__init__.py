"""Rational elliptic curves: records, a_p and L(1), conditional statistics, LMFDB access."""
from .arith import (
    AP_PRIMES, BadReductionError, adjoint_feature, ap_count, discriminant, hecke_coefficients,
    l_value, truncation_point,
)
from .lmfdb import CACHE_ENV, LMFDBClient, NetworkDisabledError, fetch_lmfdb
from .records import (
    CurveRecord, IngestReport, ValidationError, bundled_fixture, computed_ap, convert_cremona,
    ingest, load_fixture, parse_allbsd_line, record_from_dict, write_jsonl,
)
from .stats import (
    CondStatResult, CVResult, DecayFit, adjusted_correlation, controls_suite, fit_decay,
    grouped_cv, prime_decay_fit, sign_flip_deciles, tamagawa_ratio, window_table,
)
