"""
Completing node attributes on a planted-community graph
=======================================================

Build a small stochastic block model, grow the training set with the
active sampler, and score the reconstructed test attributes.
"""

import numpy as np

from atsgraph import (GcnAutoencoder, ModelConfig, SamplerConfig, generate_sbm, profile,
                      run_ats, split_dataset)

# three communities, each with its own band of attribute dimensions
graph = generate_sbm(blocks=3, nodes_per_block=100, p_in=0.1, p_out=0.01,
                     attr_dims_per_block=10, flip_noise=0.2, seed=0)
print(graph.n_nodes, "nodes,", graph.adjacency.nnz // 2, "edges,", graph.n_attr_dims, "dims")

# 40% training pool, 10% validation, 50% test; test attributes stay hidden
split = split_dataset(graph, seed=0)
print("pool / val / test:", len(split.train_pool), len(split.validation), len(split.test))

model = GcnAutoencoder(graph.n_attr_dims, ModelConfig(hidden1=64, hidden2=32), seed=0)
sampler = SamplerConfig(epsilon=150, threshold=0, n_clusters=3, batch_per_epoch=1)
model, record = run_ats(graph, split, model, sampler, total_epochs=300, seed=0)

# the pool empties one node per epoch, after which training uses all of it
print("candidates emptied at epoch", record.emptied_at)
print("best validation Recall@10 %.3f at epoch %d" % (record.best_val_recall10,
                                                       record.best_epoch))

rep = profile(model, graph, split)
for k in (10, 20, 50):
    print("Recall@%d = %.3f   NDCG@%d = %.3f" % (k, rep.recall[k], k, rep.ndcg[k]))

# centrality share of the mix drifts down as epochs pass
gammas = np.array([r["gamma"] for r in record.rows if r["selected"]])
print("gamma over first / last 20 sampling steps: %.3f / %.3f"
      % (gammas[:20].mean(), gammas[-20:].mean()))
