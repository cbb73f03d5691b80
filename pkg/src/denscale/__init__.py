"""Optimal and multi-scale partitions read off community dendrograms."""

from .bench import ExperimentSpec, corrected_rand, run_experiment
from .dendrogram import Dendrogram, enumerate_partitions, load_dendrogram, straight_cuts
from .detect import greedy_agglomerate
from .graph import Graph, Partition, SimilarityData, load_graph, load_partition
from .multiscale import ScaleProfile, find_multiscale_partitions, lifespans
from .optimize import best_straight_cut, find_best_partition
from .piecewise import PiecewiseAffine
from .quality import ModularityModel, PerformanceModel, SimilarityModel, make_model
from .relevance import relevance_curve, relevant_scales

__all__ = [
    "Dendrogram",
    "ExperimentSpec",
    "Graph",
    "ModularityModel",
    "Partition",
    "PerformanceModel",
    "PiecewiseAffine",
    "ScaleProfile",
    "SimilarityData",
    "SimilarityModel",
    "best_straight_cut",
    "corrected_rand",
    "enumerate_partitions",
    "find_best_partition",
    "find_multiscale_partitions",
    "greedy_agglomerate",
    "lifespans",
    "load_dendrogram",
    "load_graph",
    "load_partition",
    "make_model",
    "relevance_curve",
    "relevant_scales",
    "run_experiment",
    "straight_cuts",
]
