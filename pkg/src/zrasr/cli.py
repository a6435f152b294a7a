"""``zrasr`` command line: one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error.  Data goes to stdout (or
``--output``), logs to stderr.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ZrasrError

log = logging.getLogger("zrasr")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
REF = " (reference setting)"


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_lines(path: str | None) -> list[str]:
    if path in (None, "-"):
        return sys.stdin.read().splitlines()
    return Path(path).read_text(encoding="utf-8").splitlines()


def _alphabet(args):
    from .textnorm import Alphabet

    return Alphabet.load(args.alphabet) if args.alphabet else None


def _lexicon(args, split: bool):
    from .lexicon import apply_phoneme_pipeline, load_lexicon

    return apply_phoneme_pipeline(load_lexicon(args.lexicon, _alphabet(args)), split=split)


def _emission_files(path: str) -> list[tuple[str, Path]]:
    p = Path(path)
    if p.is_dir():
        files = sorted(p.glob("*.zem"))
        if not files:
            raise ZrasrError(f"no .zem files in {p}")
        return [(f.stem, f) for f in files]
    return [(p.stem, p)]


# --- subcommands -------------------------------------------------------------------


def cmd_normalize(args) -> int:
    from .textnorm import normalize_text

    alpha = _alphabet(args)
    _write("".join(normalize_text(ln, alpha) + "\n" for ln in _read_lines(args.input)), args.output)
    return EXIT_OK


def cmd_lexicon_build(args) -> int:
    from .lexicon import format_oov_report, oov_mappings, remap_oov
    from .phonology import PhonemeInventory

    lex = _lexicon(args, split=not args.no_split)
    if args.inventory:
        labels = [ln.strip() for ln in _read_lines(args.inventory) if ln.strip()]
        inv = PhonemeInventory.from_phonemes(lab for lab in labels if lab not in ("<b>", "|"))
        mapping = oov_mappings(lex, inv)
        if args.oov_report:
            Path(args.oov_report).write_text(format_oov_report(mapping), encoding="utf-8")
        lex = remap_oov(lex, inv)
    _write(lex.dumps(), args.output)
    return EXIT_OK


def cmd_g2p_train(args) -> int:
    from .g2p import dumps_model, train_g2p

    lex = _lexicon(args, split=not args.no_split)
    model = train_g2p(lex, order=args.order, em_iters=args.em_iters)
    for i, ll in enumerate(model.em_loglik):
        log.info("EM iteration %d: log-likelihood %.4f", i, ll)
    _write(dumps_model(model), args.output)
    return EXIT_OK


def cmd_lexicon_extend(args) -> int:
    from .g2p import extend_lexicon, load_model

    split = not args.no_split
    lex = _lexicon(args, split=split)
    model = load_model(args.model)
    out = extend_lexicon(
        lex,
        model,
        k=args.k,
        min_chars=args.min_chars,
        top_frac=args.top_frac,
        per_word=args.per_word,
        strict_length=args.strict_length,
        split=split,
    )
    log.info("added %d entries", len(out) - len(lex))
    _write(out.dumps(), args.output)
    return EXIT_OK


def cmd_lm_train(args) -> int:
    from .lm import train_lm, write_arpa
    from .textnorm import normalize_text

    alpha = _alphabet(args)
    corpus = [normalize_text(ln, alpha).split() for ln in _read_lines(args.corpus)]
    corpus = [s for s in corpus if s]
    if not corpus:
        raise ZrasrError("corpus is empty")
    _write(write_arpa(train_lm(corpus, order=args.order, discount=args.discount)), args.output)
    return EXIT_OK


def cmd_synth(args) -> int:
    from .emissions import synthesize_emissions, write_emissions
    from .eval import read_transcripts
    from .phonology import WORD_SEP, PhonemeInventory

    lex = _lexicon(args, split=not args.no_split)
    inv = PhonemeInventory.from_phonemes(sorted(lex.phonemes()))
    prons = {}
    for w, p in lex:
        prons.setdefault(w, p)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for n, (uid, words) in enumerate(sorted(read_transcripts(args.transcripts).items())):
        seq = []
        for w in words:
            if w not in prons:
                raise ZrasrError(f"utterance {uid}: word {w!r} is not in the lexicon")
            seq += list(prons[w]) + [WORD_SEP]
        em = synthesize_emissions(seq, inv, args.frames_per_phone, args.noise, seed=[args.seed, n])
        write_emissions(em, out / f"{uid}.zem")
    return EXIT_OK


def cmd_decode(args) -> int:
    from .decoder import DecodeParams, decode_batch, format_hypotheses
    from .emissions import read_emissions
    from .lexicon import build_trie, remap_oov
    from .lm import read_arpa

    params = DecodeParams(
        beam_size=args.beam,
        lm_weight=args.lm_weight,
        word_score=args.word_score,
        beam_threshold=args.beam_threshold,
        max_outputs=args.nbest,
    )
    items = [(uid, read_emissions(f)) for uid, f in _emission_files(args.emissions)]
    inv = items[0][1].inventory
    for uid, em in items:
        if em.labels != inv.labels:
            raise ZrasrError(f"{uid}: label inventory differs from {items[0][0]}")
    lex = remap_oov(_lexicon(args, split=not args.no_split), inv)
    trie = build_trie(lex, inv)
    lm = read_arpa(args.arpa)
    _write(format_hypotheses(decode_batch(items, trie, lm, params, jobs=args.jobs)), args.output)
    return EXIT_OK


def cmd_score(args) -> int:
    from .eval import corpus_wer, format_report, parse_transcripts, read_transcripts, transcripts_from_hypotheses

    refs = read_transcripts(args.ref)
    lines = _read_lines(args.hyp)
    if lines and all(len(ln.split("\t")) == 4 for ln in lines if ln.strip()):
        hyps = transcripts_from_hypotheses(lines, source=args.hyp)
    else:
        hyps = parse_transcripts(lines, source=args.hyp)
    _write(format_report(corpus_wer(refs, hyps), per_utterance=args.per_utt), args.output)
    return EXIT_OK


def cmd_ablate(args) -> int:
    from .ablation import AblationConfig, run_ablation
    from .decoder import DecodeParams

    cfg = AblationConfig(
        inventory_size=args.inventory_size,
        diphthong_fraction=args.diphthong_fraction,
        lexicon_size=args.lexicon_size,
        corpus_size=args.corpus_size,
        test_size=args.test_size,
        noise=args.noise,
        seed=args.seed,
        languages=args.languages,
        decode=DecodeParams(beam_size=args.beam, lm_weight=args.lm_weight, word_score=args.word_score),
    )
    rep = run_ablation(cfg, jobs=args.jobs)
    _write(rep.to_tsv() if args.format == "tsv" else rep.to_text(), args.output)
    return EXIT_OK


def cmd_convert(args) -> int:
    """Wrap a T x V ``.npy`` array from an external acoustic model as a ZEM file."""
    from .emissions import EmissionMatrix, format_zem
    from .phonology import PhonemeInventory

    mat = np.load(args.npy).astype(np.float64)
    if args.probs:
        with np.errstate(divide="ignore"):
            mat = np.log(mat)
    inv = PhonemeInventory(tuple(ln.strip() for ln in _read_lines(args.labels) if ln.strip()))
    em = EmissionMatrix(mat, inv)
    em.check_rows()
    _write(format_zem(em), args.output)
    return EXIT_OK


# --- parser ------------------------------------------------------------------------


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument(
        "--feature-table", help="articulatory feature TSV (also ZRASR_FEATURE_TABLE); default: bundled table"
    )
    common.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("-o", "--output", help="output file (default: stdout)")

    lexflags = Parser(add_help=False)
    lexflags.add_argument("--lexicon", required=True, help="word<TAB>IPA lexicon")
    lexflags.add_argument("--alphabet", help="letters file, one per line")
    lexflags.add_argument("--no-split", action="store_true", help="keep polyphthongs whole")

    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = Parser(prog="zrasr", description="Zero-resource ASR decoding toolkit.", formatter_class=fmt)
    p.add_argument("--version", action="version", version=f"zrasr {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=Parser)
    sub.required = True

    def add(name, fn, help, parents=()):
        sp = sub.add_parser(name, help=help, description=help, parents=[common, *parents], formatter_class=fmt)
        sp.set_defaults(func=fn)
        return sp

    sp = add("normalize", cmd_normalize, "normalize text lines")
    sp.add_argument("--input", help="text file (default: stdin)")
    sp.add_argument("--alphabet", help="letters file, one per line")

    sp = add("lexicon-build", cmd_lexicon_build, "clean a lexicon and map OOV phonemes", [lexflags])
    sp.add_argument("--inventory", help="acoustic model labels, one per line")
    sp.add_argument("--oov-report", help="write the OOV mapping TSV here")

    sp = add("g2p-train", cmd_g2p_train, "train a graphone G2P model", [lexflags])
    sp.add_argument("--order", type=int, default=5, help="graphone n-gram order" + REF)
    sp.add_argument("--em-iters", type=int, default=5, help="EM iterations")

    sp = add("lexicon-extend", cmd_lexicon_extend, "add G2P pronunciations to a lexicon", [lexflags])
    sp.add_argument("--model", required=True, help="G2P model file")
    sp.add_argument("--k", type=int, default=4, help="candidates per word" + REF)
    sp.add_argument("--min-chars", type=int, default=5, help="shortest eligible word" + REF)
    sp.add_argument("--top-frac", type=float, default=0.10, help="fraction of candidates kept" + REF)
    sp.add_argument("--per-word", action="store_true", help="apply --top-frac within each word")
    sp.add_argument("--strict-length", action="store_true", help="require more than --min-chars letters")

    sp = add("lm-train", cmd_lm_train, "train a Kneser-Ney n-gram LM, written as ARPA")
    sp.add_argument("--corpus", required=True, help="one sentence per line")
    sp.add_argument("--alphabet", help="letters file, one per line")
    sp.add_argument("--order", type=int, default=5, help="n-gram order" + REF)
    sp.add_argument("--discount", type=float, default=0.75, help="absolute discount")

    sp = add("synth", cmd_synth, "synthesize emission files for transcripts", [lexflags])
    sp.add_argument("--transcripts", required=True, help="id<TAB>words file")
    sp.add_argument("--out-dir", required=True, help="directory for <id>.zem files")
    sp.add_argument("--frames-per-phone", type=int, default=3)
    sp.add_argument("--noise", type=float, default=0.0, help="off-label mass and label swap rate")

    sp = add("decode", cmd_decode, "lexicon-constrained CTC beam search", [lexflags])
    sp.add_argument("--emissions", required=True, help=".zem file or directory of them")
    sp.add_argument("--arpa", required=True, help="ARPA language model")
    sp.add_argument("--beam", type=int, default=50, help="beam size" + REF)
    sp.add_argument("--lm-weight", type=float, default=2.0, help="LM weight")
    sp.add_argument("--word-score", type=float, default=0.0, help="per-word bonus")
    sp.add_argument("--beam-threshold", type=float, default=25.0, help="score window below the best state")
    sp.add_argument("--nbest", type=int, default=1, help="hypotheses per utterance")
    sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    sp = add("score", cmd_score, "corpus WER of hypotheses against references")
    sp.add_argument("--ref", required=True, help="id<TAB>words references")
    sp.add_argument("--hyp", required=True, help="id<TAB>words or decoder output")
    sp.add_argument("--per-utt", action="store_true", help="also print per-utterance counts")

    sp = add("ablate", cmd_ablate, "splitting/extension ablation on synthetic languages")
    sp.add_argument("--languages", type=int, default=5, help="number of synthetic languages")
    sp.add_argument("--inventory-size", type=int, default=20)
    sp.add_argument("--diphthong-fraction", type=float, default=0.2)
    sp.add_argument("--lexicon-size", type=int, default=200)
    sp.add_argument("--corpus-size", type=int, default=500)
    sp.add_argument("--test-size", type=int, default=20)
    sp.add_argument("--noise", type=float, default=0.15)
    sp.add_argument("--beam", type=int, default=50, help="beam size" + REF)
    sp.add_argument("--lm-weight", type=float, default=2.0)
    sp.add_argument("--word-score", type=float, default=0.0)
    sp.add_argument("--format", choices=["text", "tsv"], default="text")
    sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    sp = add("convert", cmd_convert, "wrap a .npy posterior matrix as a ZEM file")
    sp.add_argument("--npy", required=True, help="T x V array of log-probabilities")
    sp.add_argument("--labels", required=True, help="V labels, one per line, blank first as <b>")
    sp.add_argument("--probs", action="store_true", help="array holds probabilities, not logs")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=args.log_level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True
    )
    if args.feature_table:
        os.environ["ZRASR_FEATURE_TABLE"] = args.feature_table
    try:
        return args.func(args)
    except (ZrasrError, OSError) as exc:
        print(f"zrasr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
