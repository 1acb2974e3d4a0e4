"""
Speaker-classification training of an embedding model.

A temporary linear head maps the unit-norm embedding to speaker logits (times a fixed
scale); softmax cross-entropy is minimized with mini-batch Adam. The head is discarded
after training. Frontend outputs are computed once up front, since the frontend has no
parameters.
"""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from sta_mdct.errors import CorpusError, TrainingDivergenceError
from sta_mdct.nets.models import EmbeddingModel
from sta_mdct.schemas.corpus import TrainConfig
from sta_mdct.telemetry import errors_total, training_epochs_total
from sta_mdct.training.corpus import Corpus
from sta_mdct.utils.seeding import make_rng

logger = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class TrainingLog:
    losses: list[float] = field(default_factory=list)
    accuracies: list[float] = field(default_factory=list)
    final_accuracy: float = 0.0
    seconds: float = 0.0


class Adam:
    """Adam over one flat parameter vector."""

    def __init__(self, size: int, learning_rate: float):
        self.learning_rate = learning_rate
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = ADAM_BETA1 * self.m + (1 - ADAM_BETA1) * grad
        self.v = ADAM_BETA2 * self.v + (1 - ADAM_BETA2) * grad**2
        m_hat = self.m / (1 - ADAM_BETA1**self.t)
        v_hat = self.v / (1 - ADAM_BETA2**self.t)
        return params - self.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def softmax_cross_entropy(logits: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    """Loss and d(loss)/d(logits) for one example."""
    shifted = logits - logits.max()
    log_probs = shifted - np.log(np.exp(shifted).sum())
    probs = np.exp(log_probs)
    probs[label] -= 1.0
    return float(-log_probs[label]), probs


def _batch_gradient(
    model: EmbeddingModel, head: np.ndarray, inputs: list[np.ndarray], labels: np.ndarray, scale: float
) -> tuple[float, int, np.ndarray, np.ndarray]:
    loss_sum = 0.0
    correct = 0
    grad_params = np.zeros(model.n_params)
    grad_head = np.zeros_like(head)
    for x, label in zip(inputs, labels, strict=True):
        embedding, cache = model.forward_from(x, start=1)
        logits = scale * (head @ embedding)
        loss, d_logits = softmax_cross_entropy(logits, int(label))
        loss_sum += loss
        correct += int(np.argmax(logits) == label)
        grad_head += scale * np.outer(d_logits, embedding)
        _, g = model.backward(cache, scale * (head.T @ d_logits), stop=1, with_params=True)
        grad_params += g
    n = len(inputs)
    return loss_sum, correct, grad_params / n, grad_head / n


def train(model: EmbeddingModel, corpus: Corpus, cfg: TrainConfig) -> tuple[EmbeddingModel, TrainingLog]:
    """
    Train `model` to separate the speakers of `corpus`.

    Args:
        model (EmbeddingModel): Initial model (not modified).
        corpus (Corpus): Labeled utterances; `cfg.train_utterances` limits each speaker
            to its first n utterances.
        cfg (TrainConfig): Optimizer settings.

    Returns:
        tuple[EmbeddingModel, TrainingLog]: Trained model and per-epoch loss/accuracy.

    Raises:
        CorpusError: Fewer than two speakers.
        TrainingDivergenceError: Loss became NaN or infinite; carries the epoch.
    """
    if cfg.train_utterances is not None:
        corpus = corpus.split(cfg.train_utterances, 0)[0]
    speakers = corpus.speakers
    if len(speakers) < 2:
        raise CorpusError(f"training needs at least 2 speakers, got {len(speakers)}")
    label_of = {s: i for i, s in enumerate(speakers)}
    inputs = [model.frontend(u.samples) for u in corpus]
    labels = np.array([label_of[u.speaker_id] for u in corpus])

    rng = make_rng(cfg.seed)
    head = rng.normal(0.0, 1.0 / np.sqrt(model.embedding_dim), (len(speakers), model.embedding_dim))
    theta = np.concatenate([model.params, head.ravel()])
    optimizer = Adam(theta.shape[0], cfg.learning_rate)
    log = TrainingLog()
    start = time.time()

    logger.info(
        f"[TRAIN] {model.architecture}: {len(inputs)} utterances, {len(speakers)} speakers, "
        f"{cfg.epochs} epochs, lr={cfg.learning_rate}, batch={cfg.batch_size}"
    )
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(inputs))
        epoch_loss = 0.0
        epoch_correct = 0
        for begin in range(0, len(order), cfg.batch_size):
            batch = order[begin : begin + cfg.batch_size]
            current = model.with_params(theta[: model.n_params])
            head = theta[model.n_params :].reshape(len(speakers), model.embedding_dim)
            loss_sum, correct, g_params, g_head = _batch_gradient(
                current, head, [inputs[i] for i in batch], labels[batch], cfg.logit_scale
            )
            if not np.isfinite(loss_sum):
                errors_total.labels(error_type="TrainingDivergenceError", component="train").inc()
                raise TrainingDivergenceError(epoch, loss_sum / len(batch))
            epoch_loss += loss_sum
            epoch_correct += correct
            theta = optimizer.step(theta, np.concatenate([g_params, g_head.ravel()]))

        log.losses.append(epoch_loss / len(inputs))
        log.accuracies.append(epoch_correct / len(inputs))
        training_epochs_total.labels(architecture=model.architecture).inc()
        logger.info(f"[TRAIN] epoch {epoch}/{cfg.epochs}: loss={log.losses[-1]:.4f} acc={log.accuracies[-1]:.3f}")

    trained = model.with_params(theta[: model.n_params])
    head = theta[model.n_params :].reshape(len(speakers), model.embedding_dim)
    correct = sum(
        int(np.argmax(head @ trained.forward_from(x, start=1)[0]) == label)
        for x, label in zip(inputs, labels, strict=True)
    )
    log.final_accuracy = correct / len(inputs)
    log.seconds = time.time() - start
    logger.info(f"[TRAIN] done in {log.seconds:.1f}s, final training accuracy {log.final_accuracy:.3f}")
    return trained, log
