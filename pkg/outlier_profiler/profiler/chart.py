"""Render control charts as SVG."""
import io
import typing

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  pylint: disable=wrong-import-position

from . import models

# Fixed salt so element ids, and so the whole file, are the same on every run.
SVG_HASH_SALT = "outlier_profiler"


def render_chart(series: models.ChartSeries, path: str, header: str = "") -> None:
    """Plot ratios against row order with the UCL, CL and LCL reference lines.

    The header is written as an XML comment after the XML declaration and as the
    SVG description.
    """
    description = header.lstrip("# ")
    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(10, 5))
        inliers = [point for point in series.points if not point.outlier]
        outliers = [point for point in series.points if point.outlier]
        ax.scatter(
            [point.index for point in inliers],
            [point.ratio for point in inliers],
            s=6,
            color="tab:blue",
            label="difference ratio",
        )
        ax.scatter(
            [point.index for point in outliers],
            [point.ratio for point in outliers],
            s=14,
            color="tab:red",
            marker="x",
            label="outlier",
        )
        for value, name, style in (
            (series.ucl, "UCL", "--"),
            (series.cl, "CL", "-"),
            (series.lcl, "LCL", "--"),
        ):
            ax.axhline(value, color="black", linestyle=style, linewidth=0.8)
            ax.annotate(
                f"{name} = {value:.4g}",
                xy=(1.0, value),
                xycoords=("axes fraction", "data"),
                xytext=(4, 0),
                textcoords="offset points",
                va="center",
                fontsize=8,
            )

        largest = max((abs(point.ratio) for point in series.points), default=0.0)
        scale = max(abs(series.ucl), abs(series.lcl), 1.0)
        if largest > 100 * scale:
            # Gross errors would flatten everything else onto the centre line.
            ax.set_yscale("symlog", linthresh=scale)

        ax.set_xlabel("row (ordered by row id)")
        ax.set_ylabel("difference ratio")
        ax.set_title("Statistical quality control chart")
        ax.legend(loc="upper left", fontsize=8)
        fig.tight_layout()
        metadata: typing.Dict[str, typing.Any] = {"Date": None, "Creator": None}
        if description:
            metadata["Description"] = description
        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata=metadata)
        plt.close(fig)

    declaration, _, body = buffer.getvalue().partition("\n")
    with open(path, "w", encoding="utf-8", newline="") as thefile:
        thefile.write(declaration + "\n")
        if description:
            thefile.write(f"<!-- {description} -->\n")
        thefile.write(body)
