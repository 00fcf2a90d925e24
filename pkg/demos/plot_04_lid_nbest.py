"""
Reading language-ID output against the majority language
========================================================

Given ranked language hypotheses for each utterance, the n-best table counts
how often each majority language shows up in the top n. Counting Estonian
as Finnish raises the Finnish cells.
"""

import numpy as np

from dialectid.corpus import UtteranceRecord
from dialectid.lid import LidPosterior, merged_finnic_rates, nbest_rates

rng = np.random.default_rng(7)
languages = ("fi", "et", "no", "sv", "da", "en")
bias = {"fi": "et", "no": "no", "sv": "sv"}  # the language the model tends to pick

records, posteriors = [], []
for i in range(60):
    majority = ("fi", "no", "sv")[i % 3]
    records.append(UtteranceRecord(f"u{i}", f"u{i}.wav", f"s{i}", "EF", majority, "f",
                                   "demo", "read", 1.0))
    scores = dict(zip(languages, rng.random(len(languages))))
    scores[bias[majority]] += 1.0
    ranking = tuple(sorted(scores.items(), key=lambda p: -p[1]))
    posteriors.append(LidPosterior(f"u{i}", ranking))

print(nbest_rates(posteriors, records).render())

###############################################################################
print(merged_finnic_rates(posteriors, records).render())
