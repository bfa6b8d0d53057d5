"""Active sampling of training nodes for graph node-attribute completion."""
from .centrality import (CentralityVector, betweenness_centrality, closeness_centrality,
                         degree_centrality, eigenvector_centrality, pagerank)
from .evaluation import (ClassificationReport, ProfilingReport, classify, classify_restored,
                         degree_level_report, ndcg_at_k, profile, recall_at_k)
from .graph import (DataSplit, Graph, GraphFormatError, from_edges, generate_sbm,
                    load_attributes, load_edge_list, load_labels, normalize_adjacency,
                    split_dataset)
from .model import GcnAutoencoder, ModelConfig, PrimaryModel, node_bce
from .sampler import (MetricWeights, SamplerConfig, SamplerState, ScoreTable, density_scores,
                      fuse, kmeans, percentile, select, weight_schedule)
from .trainer import RunRecord, Scheme, run_ats, run_baseline

__version__ = "0.1.0"
