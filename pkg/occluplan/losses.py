#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Training objective of the occlusion inpainting generator as plain numerical functions.

Nothing here trains anything: generator outputs, discriminator probabilities and feature maps are
supplied by the caller. Every differentiable loss comes with its analytic gradient, which the test
suite checks against ``finite_diff_grad``.
"""

import logging
from collections import namedtuple

import numpy as np
from scipy.special import logsumexp

from occluplan.errors import LossDomainError

logger = logging.getLogger(__name__)


DEFAULT_TAU = 0.07


class LossBreakdown(namedtuple('LossBreakdown', 'gan patchnce inpaint_l1 total')):
    __slots__ = ()


class FeatureMap(object):
    """
    Features of one layer, ``values[channel, location]`` with spatial locations flattened.
    """

    def __init__(self, values):
        values = np.array(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, np.newaxis]
        if values.ndim != 2:
            raise LossDomainError('FeatureMap needs channels x locations, got shape {}'.format(values.shape))
        _check_finite(values, 'feature map')
        self.values = values

    @property
    def channels(self):
        return self.values.shape[0]

    @property
    def locations(self):
        return self.values.shape[1]

    def __repr__(self):
        return 'FeatureMap(channels={}, locations={})'.format(self.channels, self.locations)


class ImagePair(namedtuple('ImagePair', 'x y')):
    """
    Paired training images: occluded input ``x`` and full target ``y``.
    """
    __slots__ = ()

    def __new__(cls, x, y):
        x = np.array(x, dtype=np.float64)
        y = np.array(y, dtype=np.float64)
        if x.shape != y.shape:
            raise LossDomainError('Image pair dimensions differ: {} vs {}'.format(x.shape, y.shape))
        _check_finite(x, 'x')
        _check_finite(y, 'y')
        return super(ImagePair, cls).__new__(cls, x, y)


def _check_finite(values, what):
    if not np.all(np.isfinite(values)):
        raise LossDomainError('{} holds non-finite values'.format(what))


def _paired_batch(first, second):
    if len(first) == 0:
        raise LossDomainError('Empty batch')
    if len(first) != len(second):
        raise LossDomainError('Batch sizes differ: {} vs {}'.format(len(first), len(second)))

    pairs = []
    for i, (a, b) in enumerate(zip(first, second)):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.shape != b.shape:
            raise LossDomainError('Item {}: dimensions differ: {} vs {}'.format(i, a.shape, b.shape))
        _check_finite(a, 'item {}'.format(i))
        _check_finite(b, 'item {}'.format(i))
        pairs.append((a, b))
    return pairs


def l1_loss(generated, targets):
    pairs = _paired_batch(generated, targets)
    return sum(np.abs(g - y).sum() / y.size for g, y in pairs) / len(pairs)


def l1_loss_grad(generated, targets):
    """
    Gradient of l1_loss wrt each generated image (subgradient 0 where the difference is 0)
    """
    pairs = _paired_batch(generated, targets)
    n = len(pairs)
    return [np.sign(g - y) / (n * y.size) for g, y in pairs]


def inpaint_l1_loss(generated, inputs):
    """
    L1 restricted to the non-zero pixels of each input, normalized by their count.
    Inputs without any non-zero pixel contribute 0.
    """
    pairs = _paired_batch(generated, inputs)
    total = 0.0
    for g, x in pairs:
        known = x != 0
        k = np.count_nonzero(known)
        if k:
            total += np.abs(g - x)[known].sum() / k
    return total / len(pairs)


def inpaint_l1_loss_grad(generated, inputs):
    pairs = _paired_batch(generated, inputs)
    n = len(pairs)
    grads = []
    for g, x in pairs:
        known = x != 0
        k = np.count_nonzero(known)
        grads.append(np.sign(g - x) * known / (n * k) if k else np.zeros_like(g))
    return grads


def _as_values(feature):
    return feature.values if isinstance(feature, FeatureMap) else FeatureMap(feature).values


def _check_tau(tau):
    if not np.isfinite(tau) or tau <= 0:
        raise LossDomainError('tau must be > 0, got {}'.format(tau))


def _layer_pair(gen, tgt):
    v = _as_values(gen)
    w = _as_values(tgt)
    if v.shape != w.shape:
        raise LossDomainError('Feature maps differ: {} vs {}'.format(v.shape, w.shape))
    return v, w


def _scores(v, w, tau):
    scores = v.T.dot(w) / tau
    if not np.all(np.isfinite(scores)):
        raise LossDomainError('Feature similarities overflow')
    return scores


def patchnce_terms(v, w, tau=DEFAULT_TAU):
    """
    Contrastive loss of every location of one layer.

    Location s of ``v`` is pulled towards location s of ``w`` against every other location of ``w``:
    ``logsumexp_t(v_s . w_t / tau) - v_s . w_s / tau``.

    :param v: generated features, channels x locations
    :param w: target features, same shape
    :return: array with one loss per location
    """
    _check_tau(tau)
    v, w = _layer_pair(v, w)
    scores = _scores(v, w, tau)
    return logsumexp(scores, axis=1) - np.diag(scores)


def _as_batch(gen_features, tgt_features):
    if len(gen_features) == 0:
        raise LossDomainError('No feature maps')
    if isinstance(gen_features[0], (list, tuple)):
        batch = list(zip(gen_features, tgt_features)) if len(gen_features) == len(tgt_features) else None
    else:
        batch = [(gen_features, tgt_features)]
    if batch is None:
        raise LossDomainError('Batch sizes differ: {} vs {}'.format(len(gen_features), len(tgt_features)))
    for gen, tgt in batch:
        if len(gen) != len(tgt):
            raise LossDomainError('Layer counts differ: {} vs {}'.format(len(gen), len(tgt)))
    return batch


def patchnce_loss(gen_features, tgt_features, tau=DEFAULT_TAU):
    """
    Sum of patchnce_terms over locations and layers, averaged over the batch.

    :param gen_features: list of FeatureMap (one sample) or list of such lists (a batch)
    :param tgt_features: same structure as gen_features
    """
    _check_tau(tau)
    batch = _as_batch(gen_features, tgt_features)
    total = 0.0
    for gen, tgt in batch:
        total += sum(patchnce_terms(v, w, tau).sum() for v, w in zip(gen, tgt))
    return total / len(batch)


def patchnce_loss_grad(gen_features, tgt_features, tau=DEFAULT_TAU):
    """
    Gradient of patchnce_loss wrt the generated features, same nesting as gen_features
    """
    _check_tau(tau)
    single = not isinstance(gen_features[0], (list, tuple)) if len(gen_features) else True
    batch = _as_batch(gen_features, tgt_features)

    grads = []
    for gen, tgt in batch:
        layers = []
        for g, t in zip(gen, tgt):
            v, w = _layer_pair(g, t)
            scores = _scores(v, w, tau)
            softmax = np.exp(scores - logsumexp(scores, axis=1, keepdims=True))
            layers.append((w.dot(softmax.T) - w) / tau / len(batch))
        grads.append(layers)
    return grads[0] if single else grads


def _probabilities(values, what):
    p = np.asarray(values, dtype=np.float64).ravel()
    if p.size == 0:
        raise LossDomainError('Empty {} batch'.format(what))
    if not np.all((p > 0) & (p < 1)):
        raise LossDomainError('{} probabilities must lie in (0, 1)'.format(what))
    return p


def gan_loss(disc_real, disc_fake):
    """
    Non-saturating GAN loss.

    :return: (gen_loss, disc_loss)
    """
    real = _probabilities(disc_real, 'disc_real')
    fake = _probabilities(disc_fake, 'disc_fake')
    gen_loss = -np.mean(np.log(fake))
    disc_loss = -np.mean(np.log(real)) - np.mean(np.log1p(-fake))
    return float(gen_loss), float(disc_loss)


def gan_loss_grad(disc_fake):
    """
    Gradient of the generator loss wrt the discriminator outputs on generated images
    """
    fake = _probabilities(disc_fake, 'disc_fake')
    return -1.0 / (fake.size * fake)


def total_objective(gan, patchnce, inpaint_l1):
    parts = (gan, patchnce, inpaint_l1)
    if not all(np.isfinite(p) for p in parts):
        raise LossDomainError('Objective terms must be finite, got {}'.format(parts))
    gan, patchnce, inpaint_l1 = (float(p) for p in parts)
    return LossBreakdown(gan, patchnce, inpaint_l1, gan + patchnce + inpaint_l1)


def objective(pairs, generated, disc_real, disc_fake, gen_features, tgt_features, tau=DEFAULT_TAU):
    """
    Full generator objective over a batch of ImagePairs: GAN + patchNCE + inpainting L1.
    """
    for i, (pair, g) in enumerate(zip(pairs, generated)):
        if np.shape(g) != pair.y.shape:
            raise LossDomainError('Item {}: generated image {} does not match target {}'.format(
                i, np.shape(g), pair.y.shape))

    gen_loss, _ = gan_loss(disc_real, disc_fake)
    breakdown = total_objective(gen_loss, patchnce_loss(gen_features, tgt_features, tau),
                                inpaint_l1_loss(generated, [p.x for p in pairs]))
    logger.debug('Objective %s', breakdown)
    return breakdown


def finite_diff_grad(loss_fn, point, eps=1e-6):
    """
    Central difference gradient of a scalar function, one coordinate at a time.
    """
    if not eps > 0:
        raise LossDomainError('eps must be > 0, got {}'.format(eps))

    x = np.array(point, dtype=np.float64)
    grad = np.zeros_like(x)
    for idx in np.ndindex(*x.shape):
        orig = x[idx]
        x[idx] = orig + eps
        f_plus = loss_fn(x.copy())
        x[idx] = orig - eps
        f_minus = loss_fn(x.copy())
        x[idx] = orig
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise LossDomainError('Loss is not finite around index {}'.format(idx))
        grad[idx] = (f_plus - f_minus) / (2 * eps)
    return grad
