"""
═══════════════════════════════════════════════════════════════════════
  CSD-SVM: RISK BOXPLOTS (SVG)
  v1.0.0 (Oct 2026)
═══════════════════════════════════════════════════════════════════════

Renders a results CSV as one box per (method, n) group with the Bayes
risk as a dashed horizontal reference line. When a file mixes censoring
cases the case becomes part of the group key.

BOX CONVENTION:
  quartiles    type-7 linear interpolation (numpy method='linear')
  whiskers     most extreme data points within 1.5 IQR of the box
  outliers     everything beyond the whiskers, drawn as dots

SVG:
  standalone, width/height set by matplotlib's SVG backend
  boxes carry id="box-<i>", the reference line id="bayes-risk"
  the per-group statistics are embedded as JSON in <dc:description>

CLI:
  python app.py plot --in results.csv --out risks.svg
"""

import json
import os
import sys
import tempfile

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from csd_errors import DataError

# ============================================================
# CONFIG
# ============================================================
WHISKER_IQR = 1.5
QUIET       = os.environ.get('CSD_SVM_QUIET', '').lower() in ('1', 'true', 'yes')

METHOD_COLORS = {
    'csd-svm-rbf':    '#0ea5e9',
    'csd-svm-linear': '#f59e0b',
}
DEFAULT_COLOR = '#94a3b8'

LOG_PREFIX = '[CSD Boxplot]'


def _log(message):
    if not QUIET:
        print(f"{LOG_PREFIX} {message}", file=sys.stderr, flush=True)


# ============================================================
# STATISTICS
# ============================================================
def quantile_type7(values, q):
    return float(np.percentile(np.asarray(values, dtype=float), 100.0 * q, method='linear'))


def box_stats(values):
    """median, quartiles, 1.5 IQR whiskers and outliers for one group."""
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        raise DataError("cannot summarize an empty group")
    q1, med, q3 = (quantile_type7(x, q) for q in (0.25, 0.5, 0.75))
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - WHISKER_IQR * iqr, q3 + WHISKER_IQR * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    return {
        'count':  int(x.size),
        'med':    med,
        'q1':     q1,
        'q3':     q3,
        'whislo': float(inside.min()),
        'whishi': float(inside.max()),
        'fliers': [float(v) for v in x[(x < lo_fence) | (x > hi_fence)]],
    }


def group_results(frame):
    """[(key dict, risks)] ordered by method, censoring case, n."""
    risks = frame.dropna(subset=['risk'])
    if risks.empty:
        raise DataError("results contain no risk values to plot")
    mixed_cases = risks['censoring_case'].nunique() > 1
    keys = ['method', 'censoring_case', 'n'] if mixed_cases else ['method', 'n']
    groups = []
    for key, part in risks.groupby(keys, sort=True):
        groups.append((dict(zip(keys, key)), part['risk'].to_numpy(dtype=float)))
    return groups


def _label(key):
    case = f"\n{key['censoring_case']}" if 'censoring_case' in key else ''
    return f"{key['method']}{case}\nn={key['n']}"


# ============================================================
# RENDERING
# ============================================================
def render_risk_boxplot(frame, path, title=None):
    """Write the SVG atomically; returns the embedded statistics document."""
    groups = group_results(frame)
    stats, colors = [], []
    for key, risks in groups:
        s = box_stats(risks)
        s['label'] = _label(key)
        stats.append(s)
        colors.append(METHOD_COLORS.get(key['method'], DEFAULT_COLOR))

    bayes_values = sorted({float(v) for v in frame['bayes_risk'].dropna()})

    with matplotlib.rc_context({'svg.hashsalt': 'csd-svm', 'svg.fonttype': 'none'}):
        fig = Figure(figsize=(max(6.0, 0.9 * len(stats) + 2.0), 4.8))
        ax = fig.add_subplot()
        artists = ax.bxp(stats, positions=range(1, len(stats) + 1), widths=0.6,
                         patch_artist=True, showfliers=True,
                         flierprops={'marker': 'o', 'markersize': 3})
        for i, (box, color) in enumerate(zip(artists['boxes'], colors)):
            box.set_facecolor(color)
            box.set_gid(f"box-{i}")
        for i, median in enumerate(artists['medians']):
            median.set_gid(f"median-{i}")
        for j, value in enumerate(bayes_values):
            ax.axhline(value, color='black', linestyle='--', linewidth=1.0,
                       gid='bayes-risk' if j == 0 else f"bayes-risk-{j}")
        ax.set_ylabel('test risk')
        ax.grid(axis='y', linestyle='--', color='lightgrey', alpha=0.8)
        ax.tick_params(axis='x', labelsize=7)
        if title:
            ax.set_title(title, fontsize=11, fontweight='bold')
        fig.tight_layout()

        doc = {
            'quantile_method': 'type7',
            'whisker_iqr': WHISKER_IQR,
            'bayes_risk': bayes_values,
            'groups': [{**key, **{k: v for k, v in s.items() if k != 'label'}}
                       for (key, _), s in zip(groups, stats)],
        }
        _save_svg(fig, path, json.dumps(doc, default=_json_default))

    _log(f"✅ Wrote {len(stats)} boxes and {len(bayes_values)} reference line(s) to {path}")
    return doc


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _save_svg(fig, path, description):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix='.csd-plot-', suffix='.svg', dir=directory)
    os.close(fd)
    try:
        fig.savefig(tmp, format='svg', metadata={'Description': description, 'Date': None})
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ============================================================
# CLI REGISTRATION
# ============================================================
def cmd_plot(args):
    from csv_io import read_frame, require_columns
    from csd_errors import EXIT_OK
    import pandas as pd

    raw = read_frame(args.input)
    require_columns(raw, ['method', 'censoring_case', 'n', 'risk', 'bayes_risk'], args.input)
    if raw.empty:
        raise DataError(f"{args.input} has no result rows")
    frame = raw.copy()
    frame['n'] = pd.to_numeric(frame['n'], errors='coerce').astype('Int64')
    for col in ('risk', 'bayes_risk'):
        frame[col] = pd.to_numeric(frame[col].replace('', np.nan), errors='coerce')
    render_risk_boxplot(frame, args.out, title=args.title)
    return EXIT_OK


def register_plot_commands(subparsers):
    """
    Register `plot` on the CLI parser.

    Usage in app.py:
        from risk_boxplot import register_plot_commands
        register_plot_commands(subparsers)
    """
    p = subparsers.add_parser('plot', help='render a results CSV as SVG boxplots')
    p.add_argument('--in', dest='input', required=True, help='results CSV from `simulate`')
    p.add_argument('--out', required=True, help='output SVG path')
    p.add_argument('--title', default=None)
    p.set_defaults(handler=cmd_plot)
