#!/usr/bin/env python
u"""
config.py
Run configuration for the pseudo-Siamese asset pricing pipeline read from
    YAML with environment and command-line overrides

CALLING SEQUENCE:
    config = load_config('run.yaml')
    config = load_config('run.yaml', environ=os.environ,
        overrides=dict(seed=7, paths=dict(output='out')))

INPUTS (YAML sections):
    paths: panel, macro, transforms, factors, splits, output
    splits: validate_start, test_start or train_frac, validate_frac
    data: impute, normalize, standardize_macro, include_market_return,
        max_missing_rate, exclude_microcap, exclude_share
    hyper: SnapHyper settings (lists expand into a training grid)
    benchmarks: models, mix, n_lambda, ffn
    factor_models: model name to list of factor columns
    clustering: k, elbow, k_min, k_max, standardize, outlier_iqr, n_init
    importance: scale, repetitions, split
    analysis: split of the mispricing test and clustering (train, validate,
        test or oos for validate and test together)
    simulate: SyntheticSpec settings
    seed, threads

NOTES:
    Environment variables SNAP_<SECTION>__<KEY> override a key of a section
        and SNAP_SEED, SNAP_THREADS and SNAP_OUT override the seed, thread
        count and output directory.  Values are parsed as YAML scalars

PYTHON DEPENDENCIES:
    PyYAML: YAML parser and emitter for Python
        https://pyyaml.org/

UPDATE HISTORY:
    Written 10/2026
"""
import os
import copy
import json
import hashlib
import yaml
from snap_toolkit.errors import ConfigError

#-- splits of the alpha analyses
ANALYSIS_SPLITS = ('train','validate','test','oos')
#-- prefix of environment overrides
ENV_PREFIX = 'SNAP_'

#-- default configuration
DEFAULTS = dict(
    paths=dict(panel=None, macro=None, transforms=None, factors=None,
        splits=None, output='.'),
    splits=dict(validate_start=None, test_start=None, train_frac=0.72,
        validate_frac=0.10),
    data=dict(impute=True, normalize=True, standardize_macro=True,
        include_market_return=True, max_missing_rate=0.5,
        exclude_microcap=None, exclude_share=None),
    hyper=dict(),
    benchmarks=dict(models=['ols','ridge','lasso','elastic','ffn'], mix=0.5,
        n_lambda=100, ffn=dict()),
    factor_models=dict(),
    clustering=dict(k=5, elbow=False, k_min=2, k_max=15, standardize=True,
        outlier_iqr=8.0, n_init=10),
    importance=dict(scale=0.2, repetitions=1, split='test'),
    analysis=dict(split='test'),
    simulate=dict(),
    seed=0,
    threads=None,
)

class RunConfig(object):
    """
    Nested configuration dictionary with attribute access to sections
    """
    def __init__(self, settings):
        self.settings = settings

    def __getattr__(self, name):
        try:
            return self.__dict__['settings'][name]
        except KeyError:
            raise AttributeError(name)

    def as_dict(self):
        return copy.deepcopy(self.settings)

    #-- PURPOSE: keyword arguments for data.load_panel
    def panel_config(self):
        config = dict(self.settings['splits'])
        config.update(self.settings['data'])
        config['transform_file'] = self.settings['paths']['transforms']
        config['split_file'] = self.settings['paths']['splits']
        return config

    #-- PURPOSE: hyperparameters with the run seed
    def hyper_params(self):
        params = dict(self.settings['hyper'])
        params.setdefault('seed', self.settings['seed'])
        return params

    #-- PURPOSE: stable digest of the configuration
    #-- output directory and thread count do not change results
    def hash(self):
        settings = self.as_dict()
        settings['paths'].pop('output')
        settings.pop('threads')
        text = json.dumps(settings, sort_keys=True, default=str)
        return hashlib.sha256(text.encode('utf8')).hexdigest()

#-- PURPOSE: merge a nested dictionary into defaults
def _merge(base, update, path=''):
    for key,val in update.items():
        if key not in base:
            raise ConfigError('unknown configuration key {0}{1}'.format(path,
                key))
        if isinstance(base[key], dict) and (key not in ('hyper','simulate',
            'factor_models','ffn')):
            if not isinstance(val, dict):
                raise ConfigError('{0}{1} must be a mapping'.format(path, key))
            _merge(base[key], val, path='{0}{1}.'.format(path, key))
        elif isinstance(base[key], dict):
            base[key].update(val or {})
        else:
            base[key] = val
    return base

#-- PURPOSE: environment variable overrides as a nested dictionary
def environ_overrides(environ):
    update = {}
    for name,value in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        parsed = yaml.safe_load(value)
        key = name[len(ENV_PREFIX):].lower()
        if (key == 'seed'):
            update['seed'] = parsed
        elif (key == 'threads'):
            update['threads'] = parsed
        elif (key == 'out'):
            update.setdefault('paths', {})['output'] = value
        elif ('__' in key):
            section, option = key.split('__', 1)
            update.setdefault(section, {})[option] = parsed
    return update

#-- PURPOSE: read a run configuration with overrides
def load_config(FILENAME=None, environ=None, overrides=None):
    """
    Arguments
    ---------
    FILENAME: YAML configuration file (defaults only if None)
    environ: mapping of environment variables
    overrides: nested dictionary from command-line flags
    """
    settings = copy.deepcopy(DEFAULTS)
    if FILENAME is not None:
        with open(os.path.expanduser(FILENAME), mode='r') as fid:
            try:
                content = yaml.safe_load(fid) or {}
            except yaml.YAMLError as exc:
                raise ConfigError('invalid YAML in {0}: {1}'.format(FILENAME,
                    exc))
        if not isinstance(content, dict):
            raise ConfigError('configuration must be a mapping')
        _merge(settings, content)
    if environ is not None:
        _merge(settings, environ_overrides(environ))
    if overrides:
        _merge(settings, overrides)
    validate(settings)
    return RunConfig(settings)

#-- PURPOSE: check value ranges that do not need the data
def validate(settings):
    if not isinstance(settings['seed'], int) or (settings['seed'] < 0):
        raise ConfigError('seed must be a non-negative integer')
    threads = settings['threads']
    if (threads is not None) and (not isinstance(threads, int) or (threads < 1)):
        raise ConfigError('threads must be a positive integer')
    clustering = settings['clustering']
    if (clustering['k'] < 1) or (clustering['k_min'] < 2) or \
        (clustering['k_max'] < clustering['k_min'] + 2):
        raise ConfigError('invalid cluster counts')
    if (settings['importance']['scale'] < 0):
        raise ConfigError('importance scale must be non-negative')
    if (settings['analysis']['split'] not in ANALYSIS_SPLITS):
        raise ConfigError('analysis split must be one of {0}'.format(
            ','.join(ANALYSIS_SPLITS)))
    return settings
