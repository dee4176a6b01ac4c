"""Generation throughput: batching amortizes the per-name cost.

Times batched argmax inference at several batch sizes; per-domain time
drops as the recurrent steps vectorize across the batch.
"""

from dgalab import bench_inference, init_params
from dgalab.evaluation import bench_tsv

params = init_params(1, 32, 64, 37, rng_seed=0)
rows = bench_inference(params, [1, 8, 32, 128], T=10)
print(bench_tsv(rows).rstrip())
per8 = next(r for r in rows if r[0] == 8)[2]
per128 = next(r for r in rows if r[0] == 128)[2]
print(f"\nbatch 8 -> 128: {per8:.3f} -> {per128:.3f} ms/domain "
      f"({per8 / per128:.1f}x cheaper per name)")
