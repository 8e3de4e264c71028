# SPDX-License-Identifier: Apache-2.0
"""Phone-number spam campaign detection on social text.

Configuration overrides use the same keys as the command line config file,
for example ``{"seed": "7", "mode": "hmps", "repeats": "10"}``.
"""

from ._core import (
    Corpus,
    SpamnetError,
    ablation,
    auc,
    evaluate,
    generate_synth,
    hits,
    identify_campaigns,
    load_corpus,
    metrics,
    run_pipeline,
    smote,
)

__all__ = [
    "Corpus",
    "SpamnetError",
    "ablation",
    "auc",
    "evaluate",
    "generate_synth",
    "hits",
    "identify_campaigns",
    "load_corpus",
    "metrics",
    "run_pipeline",
    "smote",
]
