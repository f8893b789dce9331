# Human-readable evaluation report, rendered with jinja2.
from jinja2 import Environment, StrictUndefined

REPORT_TEMPLATE = """\
Translation accuracy report
===========================
scenario        : {{ config.scenario }}
representation  : {{ config.representation }}
scorer          : {{ config.scorer }}
constrained     : {{ "yes" if not config.no_constrained_decoding else "no" }}
augmented       : {{ "yes" if not config.no_augmentation else "no" }}
{%- if config.scenario == "golden-cv" %}
folds           : {{ config.k_folds }}
{%- endif %}
seed            : {{ config.seed }}
beam            : {{ config.beam }}

accuracy        : {{ "%.2f"|format(100 * report.accuracy) }}%  ({{ report.n_correct }}/{{ report.n_total }})
{%- if report.fold_accuracies|length > 1 %}

fold  accuracy
{%- for acc in report.fold_accuracies %}
{{ "%4d"|format(loop.index) }}  {{ "%6.2f"|format(100 * acc) }}%
{%- endfor %}
{%- endif %}

{{ "%-40s"|format("gold") }} {{ "%7s"|format("correct") }} {{ "%7s"|format("total") }}  most frequent error
{%- for row in rows %}
{{ "%-40s"|format(row.gold) }} {{ "%7d"|format(row.correct) }} {{ "%7d"|format(row.total) }}  {{ row.error }}
{%- endfor %}
"""

_env = Environment(undefined=StrictUndefined, keep_trailing_newline=True)


def confusion_rows(confusion: dict) -> list:
    """One row per gold target: correct count, total and the most frequent wrong prediction."""
    rows = []
    for gold in sorted(confusion):
        predicted = confusion[gold]
        errors = sorted(((n, p) for p, n in predicted.items() if p != gold), key=lambda t: (-t[0], t[1]))
        rows.append({
            "gold": gold,
            "correct": predicted.get(gold, 0),
            "total": sum(predicted.values()),
            "error": f"{errors[0][1]} (x{errors[0][0]})" if errors else "-",
        })
    return rows


def render_report_table(report: dict) -> str:
    """``report`` is an EvalReport dumped to a dict."""
    template = _env.from_string(REPORT_TEMPLATE)
    return template.render(report=report, config=report["config"], rows=confusion_rows(report["confusion"]))
