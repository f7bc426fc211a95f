"""Critical values and size analysis for a t-test after a pre-test on a nuisance coefficient."""

from ._postsel import (
    CacheStats,
    PreparedRule,
    Rule,
    SizeReport,
    SupResult,
    __version__,
    cache_stats,
    cdf,
    compute_sup,
    density,
    prepare,
    quantile,
    sample,
    set_cache_dir,
    verify,
)

__all__ = [
    "CacheStats",
    "PreparedRule",
    "Rule",
    "SizeReport",
    "SupResult",
    "__version__",
    "cache_stats",
    "cdf",
    "compute_sup",
    "density",
    "prepare",
    "quantile",
    "sample",
    "set_cache_dir",
    "verify",
]
