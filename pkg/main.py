# Command-line entry point: python main.py <subcommand> [options]
import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import click
from click.core import ParameterSource
from pydantic import ValidationError

from generators.canonical_generator import to_canonical
from generators.ltl_printer import print_formula, print_prefix, render_target
from models.data_models import RunConfig, TargetRepr
from models.errors import ConfigError, LtlPipelineError, StatMismatch, UnknownSubcommand
from models.output_trie import build_trie
from parsers.canonical_parser import from_canonical
from parsers.ltl_parser import parse_formula
from parsers.trace_parser import parse_trace
from services.backtranslate_service import BACKTRANSLATION_MODES, back_translate, count_annotations
from services.dataset_service import load_apset, load_config_bundle, load_dataset, load_lexicon, valid_targets
from services.decoder import Translator
from services.eval_service import run_eval, write_report
from services.lexical_model import LexicalModel, train_lexical
from services.paraphrase_service import make_paraphraser
from services.remote_scorer import RemoteScorer
from services.synthesis_service import build_corpus, enumerate_formulas, read_corpus, write_corpus
from validators.trace_checker import evaluate_trace

REPRESENTATIONS = [r.value for r in TargetRepr]

EXIT_CODES = {ConfigError: 2, UnknownSubcommand: 2, StatMismatch: 3}


def exit_code_for(error: LtlPipelineError) -> int:
    for cls, code in EXIT_CODES.items():
        if isinstance(error, cls):
            return code
    return 1


class PipelineCLI(click.Group):
    """Click group that turns pipeline errors into one diagnostic line and an exit code."""

    def resolve_command(self, ctx, args):
        name = args[0] if args else None
        if name is not None and not name.startswith("-") and self.get_command(ctx, name) is None:
            known = sorted(self.list_commands(ctx))
            raise UnknownSubcommand(f"no such subcommand {name!r}; known: {', '.join(known)}",
                                    {"subcommand": name, "known": known})
        return super().resolve_command(ctx, args)

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args=args, prog_name=prog_name, complete_var=complete_var,
                              standalone_mode=False, **extra)
        except LtlPipelineError as e:
            click.echo(f"error: {type(e).__name__}: {e.message}", err=True)
            sys.exit(exit_code_for(e))
        except click.UsageError as e:
            click.echo(f"error: UsageError: {e.format_message()}", err=True)
            sys.exit(2)
        except click.ClickException as e:
            click.echo(f"error: {type(e).__name__}: {e.format_message()}", err=True)
            sys.exit(e.exit_code)
        except click.exceptions.Abort:
            click.echo("error: Aborted", err=True)
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


def resolve_config(ctx: click.Context, config_path: Optional[str], **flags) -> RunConfig:
    """RunConfig with precedence: flag given on the command line > JSON config file > default."""
    values: Dict[str, Any] = {}
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            values.update(json.loads(path.read_text(encoding="utf-8")))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e.msg}")
    for name, value in flags.items():
        if ctx.get_parameter_source(name) in (ParameterSource.COMMANDLINE, ParameterSource.ENVIRONMENT):
            values[name] = value
    try:
        config = RunConfig(**values)
    except ValidationError as e:
        err = e.errors()[0]
        raise ConfigError(f"invalid run config field {'.'.join(str(p) for p in err['loc'])}: {err['msg']}")
    click.echo(json.dumps(config.model_dump(mode="json"), sort_keys=True, indent=2), err=True)
    return config


def _formula_from_options(formula: Optional[str], infix: Optional[str], aps=None):
    if (formula is None) == (infix is None):
        raise click.UsageError("give exactly one of --formula (prefix) or --infix")
    return parse_formula(formula, "prefix", aps) if formula is not None else parse_formula(infix, "infix", aps)


@click.group(cls=PipelineCLI)
def cli():
    """Natural-language to LTL translation pipeline."""


@cli.command()
@click.option("--prefix", "prefix_text", help="Formula in prefix notation.")
@click.option("--infix", "infix_text", help="Formula in infix notation.")
@click.option("--to", "target", type=click.Choice(["prefix", "infix"]), help="Output notation (default: the other one).")
@click.option("--apset", type=click.Path(), help="APSet file; atoms are checked against it.")
def parse(prefix_text, infix_text, target, apset):
    """Parse a formula and print it in the requested notation."""
    aps = load_apset(apset) if apset else None
    f = _formula_from_options(prefix_text, infix_text, aps)
    target = target or ("infix" if prefix_text is not None else "prefix")
    click.echo(print_formula(f, target))


@cli.command()
@click.option("--formula", help="Formula in prefix notation.")
@click.option("--infix", help="Formula in infix notation.")
@click.option("--canonical", "canonical_text", help="Canonical form to read back into prefix notation.")
@click.option("--lexicon", type=click.Path(), required=True)
def canonicalize(formula, infix, canonical_text, lexicon):
    """Formula -> canonical form, or canonical form -> prefix formula with --canonical."""
    lex = load_lexicon(lexicon)
    if canonical_text is not None:
        if formula is not None or infix is not None:
            raise click.UsageError("--canonical cannot be combined with --formula/--infix")
        click.echo(print_prefix(from_canonical(canonical_text, lex)))
        return
    click.echo(to_canonical(_formula_from_options(formula, infix), lex))


@cli.command()
@click.option("--formula", help="Formula in prefix notation.")
@click.option("--infix", help="Formula in infix notation.")
@click.option("--apset", type=click.Path(), required=True)
@click.option("--lexicon", type=click.Path(), required=True)
@click.option("--structures", type=click.Path())
@click.option("--mode", type=click.Choice(list(BACKTRANSLATION_MODES)), default="template", show_default=True)
@click.option("--count", "show_count", is_flag=True, help="Print the number of human-supplied strings instead.")
def backtranslate(formula, infix, apset, lexicon, structures, mode, show_count):
    """Structured-English sentence for a formula."""
    bundle = load_config_bundle(apset, lexicon, structures)
    if show_count:
        click.echo(str(count_annotations(bundle.lexicon, bundle.aps, bundle.structures, bundle.templates, mode)))
        return
    f = _formula_from_options(formula, infix, bundle.aps)
    click.echo(back_translate(f, bundle.lexicon, mode, bundle.structures, bundle.templates))


@cli.command()
@click.option("--config", "config_path", type=click.Path(), help="JSON run config.")
@click.option("--apset", type=click.Path())
@click.option("--lexicon", type=click.Path())
@click.option("--structures", type=click.Path())
@click.option("--out", type=click.Path(), required=True, help="Corpus file (JSON Lines).")
@click.option("--n-paraphrases", "n_paraphrases", type=int, default=10, show_default=True)
@click.option("--no-augmentation", "no_augmentation", is_flag=True)
@click.option("--paraphrase-backend", "paraphrase_backend", type=click.Choice(["service", "fallback"]), default="fallback", show_default=True)
@click.option("--representation", type=click.Choice(REPRESENTATIONS), default="raw-prefix", show_default=True)
@click.option("--backtranslation", type=click.Choice(list(BACKTRANSLATION_MODES)), default="template", show_default=True)
@click.option("--seed", type=int, required=True)
@click.pass_context
def synth(ctx, config_path, out, **flags):
    """Enumerate formulas, back-translate and paraphrase them into a corpus."""
    config = resolve_config(ctx, config_path, **flags)
    if not (config.apset and config.lexicon and config.structures):
        raise ConfigError("synth needs apset, lexicon and structures")
    bundle = load_config_bundle(config.apset, config.lexicon, config.structures)
    n = config.effective_paraphrases
    svc = make_paraphraser(config.paraphrase_backend, seed=config.seed) if n else None
    corpus = build_corpus(
        bundle.structures, bundle.aps, bundle.lexicon, bundle.templates, svc, n_paraphrases=n,
        representation=config.representation, mode=config.backtranslation, seed=config.seed,
    )
    write_corpus(corpus, out)
    click.echo(f"{len(corpus)} examples -> {out}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(), help="JSON run config.")
@click.option("--corpus", type=click.Path())
@click.option("--dataset", type=click.Path(), help="Dataset adapter; train on its golden examples instead of a corpus.")
@click.option("--lexicon", type=click.Path(), help="Needed to re-render labels in canonical form.")
@click.option("--representation", type=click.Choice(REPRESENTATIONS), default="raw-prefix", show_default=True)
@click.option("--out", type=click.Path(), required=True, help="Model file (JSON).")
@click.pass_context
def train(ctx, config_path, out, **flags):
    """Train the lexical scorer on a corpus, or on the golden examples of a dataset."""
    config = resolve_config(ctx, config_path, **flags)
    if config.corpus:
        examples = read_corpus(config.corpus).examples
    elif config.dataset:
        examples = load_dataset(config.dataset).examples
    else:
        raise ConfigError("train needs a corpus or a dataset")
    lex = load_lexicon(config.lexicon) if config.lexicon else None
    model = train_lexical(examples, config.representation, lex)
    model.save(out)
    click.echo(f"{len(examples)} examples -> {out}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(), help="JSON run config.")
@click.option("--input", "input_text", required=True, help="Natural-language command.")
@click.option("--model", type=click.Path(), help="Trained lexical model.")
@click.option("--scorer", type=click.Choice(["lexical", "remote"]), default="lexical", show_default=True)
@click.option("--apset", type=click.Path())
@click.option("--lexicon", type=click.Path())
@click.option("--structures", type=click.Path())
@click.option("--dataset", type=click.Path(), help="Dataset adapter; its formulas form the output set when no structures are given.")
@click.option("--representation", type=click.Choice(REPRESENTATIONS), default="raw-prefix", show_default=True)
@click.option("--beam", type=int, default=1, show_default=True)
@click.option("--no-constrained-decoding", "no_constrained_decoding", is_flag=True)
@click.option("--top-k", "top_k", type=int, default=1, show_default=True)
@click.pass_context
def translate(ctx, config_path, input_text, top_k, **flags):
    """Translate one command into a formula."""
    config = resolve_config(ctx, config_path, **flags)
    click.echo("\n".join(translate_command(config, input_text, top_k)))


def translate_command(config: RunConfig, text: str, top_k: int = 1):
    """Output lines of ``translate``: the formula, or ``score<TAB>formula`` lines for top-k."""
    if config.scorer == "remote":
        with RemoteScorer() as scorer:
            return _translate_with(config, scorer, TargetRepr(config.representation), text, top_k)
    if not config.model:
        raise ConfigError("the lexical scorer needs --model")
    scorer = LexicalModel.load(config.model)
    return _translate_with(config, scorer, scorer.representation, text, top_k)


def _translate_with(config: RunConfig, scorer, representation: TargetRepr, text: str, top_k: int):
    lex = load_lexicon(config.lexicon) if config.lexicon else None
    if config.structures:
        if not (config.apset and config.lexicon):
            raise ConfigError("a structures file needs --apset and --lexicon")
        bundle = load_config_bundle(config.apset, config.lexicon, config.structures)
        valid = enumerate_formulas(bundle.structures, bundle.aps)
    elif config.dataset:
        valid = valid_targets(load_dataset(config.dataset))
    else:
        raise ConfigError("translate needs structures or a dataset to define the output set")
    trie = build_trie(render_target(f, representation, lex) for f in valid)
    vocab = sorted(set(trie.vocabulary()) | set(getattr(scorer, "vocabulary", lambda: [])()))
    translator = Translator(scorer, trie, vocab, beam=max(1, config.beam), constrained=not config.no_constrained_decoding)
    if top_k > 1:
        return [f"{score:.4f}\t{out}" for out, score in translator.translate_nbest(text, top_k)]
    return [translator.translate(text)]


@cli.command()
@click.option("--formula", help="Formula in prefix notation.")
@click.option("--infix", help="Formula in infix notation.")
@click.option("--trace", "trace_text", required=True, help='Finite trace, e.g. "{} {B} {S,C}".')
@click.option("--apset", type=click.Path())
def check(formula, infix, trace_text, apset):
    """Finite-trace satisfaction: prints SAT or UNSAT."""
    aps = load_apset(apset) if apset else None
    f = _formula_from_options(formula, infix, aps)
    try:
        trace = parse_trace(trace_text, aps)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--trace")
    click.echo("SAT" if evaluate_trace(f, trace, aps) else "UNSAT")


@cli.command(name="eval")
@click.option("--config", "config_path", type=click.Path(), help="JSON run config.")
@click.option("--dataset", type=click.Path(), help="Dataset adapter file.")
@click.option("--apset", type=click.Path())
@click.option("--lexicon", type=click.Path())
@click.option("--structures", type=click.Path())
@click.option("--corpus", type=click.Path())
@click.option("--model", type=click.Path())
@click.option("--scenario", type=click.Choice(["golden-cv", "low-resource"]), default="low-resource", show_default=True)
@click.option("--representation", type=click.Choice(REPRESENTATIONS), default="raw-prefix", show_default=True)
@click.option("--scorer", type=click.Choice(["lexical", "oracle", "remote"]), default="lexical", show_default=True)
@click.option("--backtranslation", type=click.Choice(list(BACKTRANSLATION_MODES)), default="template", show_default=True)
@click.option("--paraphrase-backend", "paraphrase_backend", type=click.Choice(["service", "fallback"]), default="fallback", show_default=True)
@click.option("--no-constrained-decoding", "no_constrained_decoding", is_flag=True)
@click.option("--no-augmentation", "no_augmentation", is_flag=True)
@click.option("--n-paraphrases", "n_paraphrases", type=int, default=10, show_default=True)
@click.option("--beam", type=int, default=1, show_default=True)
@click.option("--k-folds", "k_folds", type=int, default=5, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(), help="Report path stem; writes <out>.json and <out>.txt.")
@click.pass_context
def eval_command(ctx, config_path, out, **flags):
    """Run an evaluation and print its accuracy."""
    config = resolve_config(ctx, config_path, **flags)
    report = run_eval(config)
    if out:
        write_report(report, out)
    click.echo(f"accuracy {report.accuracy:.4f} ({report.n_correct}/{report.n_total})")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="ltl-pipeline")
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
