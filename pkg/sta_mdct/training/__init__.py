from sta_mdct.training.corpus import Corpus, Utterance, load_corpus, synth_corpus, write_corpus
from sta_mdct.training.trainer import TrainingLog, train

__all__ = ["Corpus", "TrainingLog", "Utterance", "load_corpus", "synth_corpus", "train", "write_corpus"]
