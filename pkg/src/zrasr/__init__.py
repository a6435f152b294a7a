"""Zero-resource ASR decoding toolkit: IPA processing, lexicons, G2P, n-gram LMs,
lexicon-constrained CTC beam search and WER scoring."""

__version__ = "0.1.0"
