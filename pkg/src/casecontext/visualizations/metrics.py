"""
Metric comparison figures.
"""
import pandas as pd
import plotly.express as px
import plotly.graph_objects as go


def metrics_bar_figure(table: pd.DataFrame, k: int) -> go.Figure:
    """
    Grouped bar chart of aggregate metrics per system.

    Args:
        table (pd.DataFrame): Systems as rows, metrics as columns, values in [0, 1].
        k (int): Cutoff, shown in the title.

    Returns:
        go.Figure: Plotly figure.
    """
    long = (table * 100).reset_index(names="system").melt(id_vars="system", var_name="metric", value_name="score")
    fig = px.bar(
        long,
        x="metric",
        y="score",
        color="system",
        barmode="group",
        labels={"metric": "Metric", "score": "Score (%)", "system": "System"},
        title=f"Retrieval quality at K={k}",
        height=500
    )
    fig.update_layout(
        xaxis_title="Metric",
        yaxis_title="Score (%)",
        legend_title="System",
        font=dict(size=12),
        yaxis=dict(range=[0, 100])
    )
    return fig
