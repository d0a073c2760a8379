"""
Counting a stream
=================

Feed a stream with repeats through a filter and compare the raw counter,
the corrected estimate and the fill-ratio baselines to the exact answer.
"""
import numpy as np

from bfce import BloomFilter, corrected_estimate, deserialize, serialize
from bfce.estimator import estimate_papapetrou, estimate_swamidass
from bfce.hashing import encode_id

rng = np.random.default_rng(7)
# 40000 draws from 25000 ids: roughly 20000 distinct
stream = rng.integers(0, 25000, size=40000)

filt = BloomFilter(162945, 6, seed=1)
seen = set()
for step, ident in enumerate(stream.tolist(), 1):
    filt.insert_counting(encode_id(ident))
    seen.add(ident)
    if step % 8000 == 0:
        est = corrected_estimate(filt)
        print(f"after {step:5d} items: true={len(seen):5d} counter={filt.s:5d} "
              f"corrected={est.mean:9.2f} +- {est.std_dev:5.2f} "
              f"papapetrou={estimate_papapetrou(filt.m, filt.k, filt.ones):9.2f}")

# The baselines only look at the bit array, so they agree on large filters.
print(f"\nswamidass {estimate_swamidass(filt.m, filt.k, filt.ones):.2f}")

# A serialized filter carries its counter and the running correction.
blob = serialize(filt)
copy = deserialize(blob)
print(f"{len(blob)} bytes; restored estimate {corrected_estimate(copy).mean:.2f}")
