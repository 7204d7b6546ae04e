"""
HTML diagnostics report: trace plots of the global parameters for every chain
and threshold-sensitivity curves P(|beta_j| > delta) of the leading coefficients.
"""

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Sequence, Union

import pandas as pd

from .samplers import ChainStore

if TYPE_CHECKING:
    import plotly.graph_objects as go

logger = logging.getLogger(__name__)

TRACE_PARAMETERS = (("tau", "τ"), ("c_sq", "c²"), ("eta", "η"), ("sigma_sq", "σ²"))


def build_diagnostics_figure(stores: Sequence[ChainStore], curves: pd.DataFrame) -> "go.Figure":
    """Plotly figure with one trace panel per global parameter and a sensitivity panel"""
    import plotly.graph_objects as go
    from plotly.subplots import make_subplots

    titles = [f"Trace of {label}" for _, label in TRACE_PARAMETERS]
    titles.append("Selection probability vs threshold δ")
    fig = make_subplots(rows=len(titles), cols=1, subplot_titles=titles, vertical_spacing=0.05)

    for row, (name, _) in enumerate(TRACE_PARAMETERS, start=1):
        for k, store in enumerate(stores):
            fig.add_trace(
                go.Scatter(
                    x=store.kept_iterations,
                    y=store.scalar_draws(name),
                    mode="lines",
                    name=f"chain {k}",
                    legendgroup=f"chain {k}",
                    showlegend=row == 1,
                    line={"width": 1},
                ),
                row=row,
                col=1,
            )
        fig.update_xaxes(title_text="iteration", row=row, col=1)

    curve_row = len(titles)
    for column in curves.columns:
        fig.add_trace(
            go.Scatter(x=curves.index, y=curves[column], mode="lines+markers", name=column),
            row=curve_row,
            col=1,
        )
    fig.update_xaxes(type="log", title_text="δ", row=curve_row, col=1)
    fig.update_yaxes(range=[0, 1.02], title_text="P(|β| > δ)", row=curve_row, col=1)
    fig.update_layout(height=300 * len(titles), title_text="BUGS chain diagnostics")
    return fig


def write_diagnostics_html(
    stores: Sequence[ChainStore], curves: pd.DataFrame, path: Union[str, Path]
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    build_diagnostics_figure(stores, curves).write_html(str(path), include_plotlyjs="cdn")
    logger.info("Wrote diagnostics report to %s", path)
    return path
