#!/usr/bin/env python
u"""
checkpoint.py
Writes and reads trained pseudo-Siamese network parameters as HDF5

CALLING SEQUENCE:
    write_checkpoint(model, 'snap_unmasked.h5')
    model = read_checkpoint('snap_unmasked.h5')
    digest = parameter_hash(model)

OUTPUTS:
    HDF5 file with one group per branch (alpha, beta, lambda) holding
        layer<l>/W, layer<l>/b and head/w, head/b datasets
    global attributes: format version, masked flag, seed and the training
        hyperparameters as JSON

NOTES:
    Datasets are written without modification times.  Group headers still
        carry timestamps, so compare checkpoints with parameter_hash

PYTHON DEPENDENCIES:
    numpy: Scientific Computing Tools For Python
        https://numpy.org
        https://numpy.org/doc/stable/user/numpy-for-matlab-users.html
    h5py: Python interface for Hierarchal Data Format 5 (HDF5)
        https://www.h5py.org/

PROGRAM DEPENDENCIES:
    lstm.py: LSTM layer parameters
    snap.py: pseudo-Siamese network model

UPDATE HISTORY:
    Written 10/2026
"""
import os
import json
import hashlib
import h5py
import numpy as np
from snap_toolkit.errors import ParseError, ShapeError
from snap_toolkit.lstm import LstmLayerParams
from snap_toolkit.snap import BRANCHES, SnapHyper, SnapBranch, SnapModel

#-- checkpoint format version
VERSION = 1

#-- PURPOSE: write model parameters to HDF5
def write_checkpoint(model, FILENAME, CLOBBER=True):
    clobber = 'w' if CLOBBER else 'w-'
    fileID = h5py.File(os.path.expanduser(FILENAME), clobber, track_order=True)
    for key in BRANCHES:
        branch = model.branches[key]
        fileID.create_group(key)
        fileID[key].attrs['input_dim'] = branch.input_dim
        fileID[key].attrs['hidden_dim'] = branch.hidden_dim
        fileID[key].attrs['layers'] = len(branch.stack)
        for l,layer in enumerate(branch.stack):
            group = fileID[key].create_group('layer{0:d}'.format(l))
            group.create_dataset('W', data=layer.W, track_times=False)
            group.create_dataset('b', data=layer.b, track_times=False)
        group = fileID[key].create_group('head')
        group.create_dataset('w', data=branch.w, track_times=False)
        group.create_dataset('b', data=branch.b, track_times=False)
    #-- global attributes
    fileID.attrs['format_version'] = VERSION
    fileID.attrs['masked'] = int(model.masked)
    fileID.attrs['seed'] = int(model.hyper.seed)
    fileID.attrs['hyper'] = json.dumps(model.hyper.as_dict(), sort_keys=True)
    fileID.attrs['parameter_hash'] = parameter_hash(model)
    fileID.close()

#-- PURPOSE: read model parameters from HDF5
def read_checkpoint(FILENAME):
    fileID = h5py.File(os.path.expanduser(FILENAME), 'r')
    version = int(fileID.attrs.get('format_version', -1))
    if (version != VERSION):
        fileID.close()
        raise ParseError('unsupported checkpoint version {0:d}'.format(version))
    hyper = SnapHyper(**json.loads(fileID.attrs['hyper']))
    branches = {}
    for key in BRANCHES:
        if key not in fileID:
            fileID.close()
            raise ParseError('checkpoint misses the {0} branch'.format(key))
        stack = []
        for l in range(int(fileID[key].attrs['layers'])):
            group = fileID[key]['layer{0:d}'.format(l)]
            stack.append(LstmLayerParams(group['W'][:], group['b'][:]))
        head = fileID[key]['head']
        branches[key] = SnapBranch(stack, head['w'][:], head['b'][:])
    masked = bool(fileID.attrs['masked'])
    fileID.close()
    #-- alpha and beta branches share their shapes
    for la,lb in zip(branches['alpha'].stack, branches['beta'].stack):
        if (la.W.shape != lb.W.shape):
            raise ShapeError('alpha and beta branches differ in shape')
    return SnapModel(branches['alpha'], branches['beta'], branches['lambda'],
        hyper, MASKED=masked)

#-- PURPOSE: SHA-256 digest of every parameter of a model
def parameter_hash(model):
    digest = hashlib.sha256()
    for name,p in model.parameters(TRAINABLE=False):
        digest.update(name.encode('utf8'))
        digest.update(np.ascontiguousarray(p, dtype='<f8').tobytes())
    return digest.hexdigest()
