"""
═══════════════════════════════════════════════════════════════════════
  CSD-SVM: MODEL STORE
  v1.0.0 (Oct 2026)
═══════════════════════════════════════════════════════════════════════

Versioned JSON model files.

DOCUMENT:
  format           'csd-svm-model'
  format_version   1
  saved_at         ISO-8601 UTC timestamp (informational only)
  kernel           {'kind', 'sigma'}
  lambda, intercept, alpha[n], support[n][d]
  censoring        known: {'kind', 'formula', 'params', 'floor'}
                   kde:   {'kind', 'samples', 'bandwidth', 'floor', 'rule'}
  training         {'n', 'd', 'tau', 'data_digest'}

Floats are written by json with their shortest round-trip repr, so
save -> load -> predict reproduces in-process predictions bitwise.
Writes go to a sibling temp file first and are renamed into place.
"""

import hashlib
import json
import os
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from censoring import model_from_descriptor
from csd_errors import DataError
from kernel_core import KernelSpec
from solver import FittedModel

# ============================================================
# CONFIG
# ============================================================
MODEL_FORMAT         = 'csd-svm-model'
MODEL_FORMAT_VERSION = 1
SUPPORTED_VERSIONS   = (1,)
QUIET                = os.environ.get('CSD_SVM_QUIET', '').lower() in ('1', 'true', 'yes')

LOG_PREFIX = '[CSD Model Store]'


def _log(message):
    if not QUIET:
        print(f"{LOG_PREFIX} {message}", file=sys.stderr, flush=True)


def dataset_digest(data):
    """sha256 over the raw covariate, time and status buffers plus tau."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(data.covariates, dtype=float).tobytes())
    h.update(np.ascontiguousarray(data.times, dtype=float).tobytes())
    h.update(np.ascontiguousarray(data.status, dtype=np.int8).tobytes())
    h.update(repr(float(data.tau)).encode('utf-8'))
    return h.hexdigest()


def model_document(model, cens, data):
    return {
        'format':         MODEL_FORMAT,
        'format_version': MODEL_FORMAT_VERSION,
        'saved_at':       datetime.now(timezone.utc).isoformat(),
        'kernel':         model.kernel.to_dict(),
        'lambda':         model.lam,
        'intercept':      model.intercept,
        'alpha':          [float(a) for a in model.alpha],
        'support':        [[float(x) for x in row] for row in model.support],
        'censoring':      cens.descriptor(),
        'training': {
            'n':           data.n,
            'd':           data.d,
            'tau':         data.tau,
            'data_digest': dataset_digest(data),
        },
    }


def save_model(path, model, cens, data):
    """Write the model document atomically; returns the document."""
    doc = model_document(model, cens, data)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix='.csd-model-', suffix='.tmp', dir=directory)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as fh:
            json.dump(doc, fh, indent=1, allow_nan=False)
            fh.write('\n')
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    _log(f"✅ Saved model to {path} (n={data.n}, d={data.d}, {model.kernel.label()})")
    return doc


def load_model(path):
    """(FittedModel, CensoringModel, training metadata); any defect is a DataError."""
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            doc = json.load(fh)
    except FileNotFoundError as e:
        raise DataError(f"no such model file: {path}") from e
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise DataError(f"model file {path} is not valid JSON: {e}") from e

    if not isinstance(doc, dict) or doc.get('format') != MODEL_FORMAT:
        raise DataError(f"{path} is not a {MODEL_FORMAT} document")
    if doc.get('format_version') not in SUPPORTED_VERSIONS:
        raise DataError(f"{path}: unsupported format version {doc.get('format_version')!r}")

    try:
        training = doc['training']
        support = np.asarray(doc['support'], dtype=float)
        alpha = np.asarray(doc['alpha'], dtype=float)
        if support.ndim != 2 or support.shape != (int(training['n']), int(training['d'])):
            raise DataError(f"{path}: support shape {support.shape} disagrees with training metadata")
        model = FittedModel(
            kernel=KernelSpec.from_dict(doc['kernel']),
            support=support,
            alpha=alpha,
            intercept=None if doc['intercept'] is None else float(doc['intercept']),
            lam=float(doc['lambda']),
            n_train=int(training['n']),
            censoring=doc['censoring'],
        )
        cens = model_from_descriptor(doc['censoring'])
    except DataError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"model file {path} is corrupted: {type(e).__name__}: {e}") from e
    return model, cens, training
