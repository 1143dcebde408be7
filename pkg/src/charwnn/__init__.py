"""CharWNN named entity tagger: word + character-level convolutional embeddings, window scoring and Viterbi decoding."""

__version__ = "0.1.0"
