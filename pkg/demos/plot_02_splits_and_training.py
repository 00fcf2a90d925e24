"""
Splits and the classifier
=========================

Two clusters per dialect are enough to show how speaker-dependent and
speaker-independent splits differ, and how the MLP is trained.
"""

import numpy as np

from dialectid.classifier import Hyperparams, ModelConfig, predict_proba, train
from dialectid.corpus import DIALECTS, UtteranceRecord
from dialectid.evaluation import evaluate
from dialectid.splits import make_sd_split, make_si_split

rng = np.random.default_rng(3)
records, vectors = [], {}
for d_idx, dialect in enumerate(DIALECTS):
    for s in range(6):
        # every speaker has an offset of their own around the dialect centre
        centre = np.array([np.cos(d_idx * np.pi / 2), np.sin(d_idx * np.pi / 2)]) * 3
        offset = rng.normal(0, 0.8, 2)
        for u in range(20):
            utt = f"{dialect}-{s}-{u}"
            records.append(UtteranceRecord(utt, f"{utt}.wav", f"{dialect}-{s}", dialect, "no",
                                           "fm"[s % 2], "demo", "read", 1.0))
            vectors[utt] = centre + offset + rng.normal(0, 0.5, 2)

###############################################################################
# An SD split shares speakers between train and test; SI holds out three
# whole speakers per dialect.
sd = make_sd_split(records, seed=11)
si = make_si_split(records, seed=11)
print(f"SD: {len(sd.train_ids)} train / {len(sd.val_ids)} val / {len(sd.test_ids)} test")
print(f"SI: held-out speakers {si.held_out_speakers}")

###############################################################################
# Train the default network on each split. A larger learning rate than the
# default recipe keeps this demo short.
label = {r.utt_id: DIALECTS.index(r.dialect) for r in records}


def arrays(ids):
    return np.stack([vectors[i] for i in ids]), np.array([label[i] for i in ids])


for split in (sd, si):
    cfg = ModelConfig(input_dim=2, seed=split.seed)
    params, history = train(cfg, Hyperparams(lr=1e-3, epochs=20), arrays(split.train_ids),
                            arrays(split.val_ids))
    x_te, y_te = arrays(split.test_ids)
    pred = predict_proba(params, x_te).argmax(axis=1)
    report = evaluate([(DIALECTS[t], DIALECTS[p]) for t, p in zip(y_te, pred)])
    print(f"{split.mode}: best epoch {history.best_epoch}, "
          f"unweighted accuracy {report.unweighted_accuracy:.1f}%")
