"""
Training-loss figures.
"""
from pathlib import Path
from typing import Sequence, Union

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go


def loss_curve_figure(loss_history: Sequence[float], seed: int, window: int = 20) -> go.Figure:
    """
    Build the per-step loss curve with a rolling mean.

    Args:
        loss_history (Sequence[float]): Batch loss per step.
        seed (int): Training seed, shown in the title.
        window (int): Rolling-mean window in steps.

    Returns:
        go.Figure: Plotly figure.
    """
    df = pd.DataFrame({"step": range(1, len(loss_history) + 1), "loss": list(loss_history)})
    df["rolling mean"] = df["loss"].rolling(window, min_periods=1).mean()
    long = df.melt(id_vars="step", value_vars=["loss", "rolling mean"], var_name="series", value_name="value")

    fig = px.line(
        long,
        x="step",
        y="value",
        color="series",
        labels={"step": "Step", "value": "Loss", "series": ""},
        title=f"Contrastive training loss - seed {seed}",
        height=450
    )
    fig.update_layout(
        xaxis_title="Step",
        yaxis_title="Loss",
        font=dict(size=12)
    )
    return fig


def write_figure(fig: go.Figure, path: Union[str, Path], div_id: str) -> None:
    """
    Write a figure as a standalone HTML page that loads plotly.js from its CDN.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.write_html(path, include_plotlyjs="cdn", full_html=True, div_id=div_id)
