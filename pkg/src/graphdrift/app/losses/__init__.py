"""Misfit terms and cost functions."""

from .assembly import (
    TERMS,
    LossWeights,
    ParameterLayout,
    breakdown,
    discrete_loss_terms,
    edge_loss,
    edge_loss_terms,
    graph_loss,
    graph_loss_terms,
    vertex_terms,
)
from .binding import EdgeNetBinding, LossError, NetworkField
from .misfits import (
    ContinuityVariant,
    continuity_misfit_aux,
    continuity_misfit_avg,
    dirichlet_misfit,
    discrete_residual_misfit,
    initial_misfit,
    kirchhoff_misfit,
    pde_residual,
    residual_misfit,
    signed_flux_sum,
    vertex_flux,
    vertex_trace,
)

__all__ = [
    "ContinuityVariant",
    "EdgeNetBinding",
    "LossError",
    "LossWeights",
    "NetworkField",
    "ParameterLayout",
    "TERMS",
    "breakdown",
    "continuity_misfit_aux",
    "continuity_misfit_avg",
    "dirichlet_misfit",
    "discrete_loss_terms",
    "discrete_residual_misfit",
    "edge_loss",
    "edge_loss_terms",
    "graph_loss",
    "graph_loss_terms",
    "initial_misfit",
    "kirchhoff_misfit",
    "pde_residual",
    "residual_misfit",
    "signed_flux_sum",
    "vertex_flux",
    "vertex_terms",
    "vertex_trace",
]
