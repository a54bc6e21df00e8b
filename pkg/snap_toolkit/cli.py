#!/usr/bin/env python
u"""
cli.py
Command line pipeline for the pseudo-Siamese asset pricing network:
    simulate panels, train masked and unmasked models, evaluate against
    benchmarks, test for mispricing, cluster the arbitrage portfolio and
    rank feature importance

CALLING SEQUENCE:
    python snap_asset_pricing.py simulate --config=run.yaml --out=run
    python snap_asset_pricing.py train --config=run.yaml --out=run
    python snap_asset_pricing.py train --masked --config=run.yaml --out=run
    python snap_asset_pricing.py evaluate --config=run.yaml --out=run
    python snap_asset_pricing.py test-alpha --config=run.yaml --out=run
    python snap_asset_pricing.py cluster --k=5 --config=run.yaml --out=run
    python snap_asset_pricing.py importance --config=run.yaml --out=run
    python snap_asset_pricing.py report --config=run.yaml --out=run

COMMAND LINE OPTIONS:
    -C X, --config=X: YAML run configuration
    -S X, --seed=X: master random seed
    -P X, --threads=X: worker processes (default: available cores)
    -O X, --out=X: output directory
    -M, --masked: train the masked (alpha-free) model
    --exclude-microcap=X: drop stocks below this monthly market-cap quantile
    --exclude-share=X: drop stocks below this share of total market cap
    --k=X: clusters per month
    --elbow: choose the number of clusters with the elbow method
    --split=X: split of test-alpha and cluster (train, validate, test or oos
        for validate and test together)
    -V, --verbose: verbose output of processing run
    -l, --log: output log file

NOTES:
    Every command writes manifest_<command>.json (configuration hash, seed
        and code version) before its results.  Result files carry no
        timestamps so that a repeated run reproduces them byte for byte
    Exit codes: 0 success, 1 computational failure, 2 configuration or
        input/output error

PYTHON DEPENDENCIES:
    numpy: Scientific Computing Tools For Python
        https://numpy.org
    pandas: Python Data Analysis Library
        https://pandas.pydata.org/
    PyYAML: YAML parser and emitter for Python
        https://pyyaml.org/

PROGRAM DEPENDENCIES:
    config.py: run configuration
    data.py: panel ingestion and synthetic panels
    snap.py: pseudo-Siamese network training and prediction
    checkpoint.py: HDF5 model checkpoints
    portfolio.py: evaluation metrics and portfolios
    benchmarks.py: comparison models and factor regressions
    stats.py: mispricing testing procedure
    clustering.py: arbitrage portfolio clustering
    importance.py: perturbation feature importance

UPDATE HISTORY:
    Written 10/2026
"""
from __future__ import print_function

import os
import sys
import json
import time
import getopt
import hashlib
import logging
import numpy as np
import pandas as pd
import snap_toolkit
from snap_toolkit.errors import SnapError, ConfigError, ParseError
from snap_toolkit.config import load_config, ANALYSIS_SPLITS
from snap_toolkit.data import load_panel, panel_tensor, synthesize, \
    SyntheticSpec, write_panel_csv, write_macro_csv, read_macro_csv, \
    exclude_microcaps, split_months, SPLITS
from snap_toolkit.snap import SnapHyper, train, train_grid, predict_split, \
    estimate_alpha
from snap_toolkit.checkpoint import write_checkpoint, read_checkpoint, \
    parameter_hash
from snap_toolkit.portfolio import eval_report, long_short_series, \
    arbitrage_series, tidy_series
from snap_toolkit.benchmarks import fit_benchmarks, factor_model_predictions, \
    arbitrage_regression
from snap_toolkit.stats import mispricing_test
from snap_toolkit.clustering import monthly_cluster_sharpes, sharpe_trend, \
    elbow_detect
from snap_toolkit.importance import importance_report

COMMANDS = ('simulate','train','evaluate','test-alpha','cluster','importance',
    'report')

#-- PURPOSE: convert numpy scalars for json
def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(repr(obj))

def write_json(data, FILENAME):
    with open(FILENAME, mode='w') as fid:
        json.dump(data, fid, indent=2, sort_keys=True, default=_json_default)
    logging.getLogger(__name__).info('wrote {0}'.format(FILENAME))
    return FILENAME

#-- PURPOSE: write the run manifest and return its digest
def write_manifest(config, command, **kwargs):
    manifest = dict(command=command, config_hash=config.hash(),
        seed=config.seed, code_version=snap_toolkit.__version__)
    manifest.update(kwargs)
    text = json.dumps(manifest, sort_keys=True)
    manifest['manifest_hash'] = hashlib.sha256(text.encode('utf8')).hexdigest()
    write_json(manifest, _output(config, 'manifest_{0}.json'.format(
        command.replace('-','_'))))
    return manifest['manifest_hash']

#-- PURPOSE: path in the output directory
def _output(config, name):
    return os.path.join(os.path.expanduser(config.paths['output']), name)

#-- PURPOSE: preprocessed panel tensor of the configured files
def load_tensor(config):
    for key in ('panel','macro'):
        if not config.paths[key]:
            raise ConfigError('paths.{0} is required'.format(key))
    dataset = load_panel(config.paths['panel'], config.paths['macro'],
        config.panel_config())
    return panel_tensor(dataset,
        INCLUDE_MARKET=config.data['include_market_return'])

#-- PURPOSE: read a trained checkpoint
def _checkpoint(config, MASKED=False):
    name = 'snap_masked.h5' if MASKED else 'snap_unmasked.h5'
    return read_checkpoint(_output(config, name))

#-- PURPOSE: write the raw synthetic panel with its truth
def cmd_simulate(config):
    write_manifest(config, 'simulate')
    settings = dict(config.simulate)
    settings.setdefault('seed', config.seed)
    dataset = synthesize(SyntheticSpec(**settings))
    files = dict(panel=_output(config, 'panel.csv'),
        macro=_output(config, 'macro.csv'),
        transforms=_output(config, 'transforms.csv'),
        truth=_output(config, 'truth.csv'))
    write_panel_csv(dataset.raw_panel, dataset.characteristics, files['panel'])
    write_macro_csv(dataset.raw_macro, files['macro'])
    pd.DataFrame(dict(series=dataset.macro_names,
        transform_code='level')).to_csv(files['transforms'], index=False)
    dataset.truth.to_csv(files['truth'], index=False)
    return files

#-- PURPOSE: train the masked or unmasked network
def cmd_train(config, MASKED=False, VERBOSE=False):
    tag = 'masked' if MASKED else 'unmasked'
    write_manifest(config, 'train-masked' if MASKED else 'train',
        masked=bool(MASKED))
    tensor = load_tensor(config)
    params = config.hyper_params()
    if any(isinstance(v, (list, tuple)) for v in params.values()):
        model, log = train_grid(tensor, params, MASKED=MASKED, VERBOSE=VERBOSE)
    else:
        model, log = train(tensor, SnapHyper(**params), MASKED=MASKED,
            VERBOSE=VERBOSE)
    write_checkpoint(model, _output(config, 'snap_{0}.h5'.format(tag)))
    log.to_csv(_output(config, 'train_log_{0}.csv'.format(tag)), index=False)
    return parameter_hash(model)

#-- PURPOSE: market caps aligned with prediction panel rows
def attach_mktcap(panel, tensor):
    mi = pd.Index(tensor.months).get_indexer(panel['month'])
    si = pd.Index(tensor.stock_ids).get_indexer(panel['stock_id'])
    return panel.assign(mktcap=tensor.mktcap[mi,si])

#-- PURPOSE: predictions of a model on every split
def _split_panels(model, tensor, quantile=None, share=None):
    panels = {}
    for split in SPLITS:
        panel = attach_mktcap(model.predict_split(tensor, split), tensor)
        panels[split] = exclude_microcaps(panel, quantile=quantile,
            share=share)
    return panels

#-- PURPOSE: evaluation report of the network and the benchmarks
def cmd_evaluate(config, VERBOSE=False):
    manifest_hash = write_manifest(config, 'evaluate')
    tensor = load_tensor(config)
    quantile = config.data['exclude_microcap']
    share = config.data['exclude_share']
    models = dict(snap=_checkpoint(config))
    if os.access(_output(config, 'snap_masked.h5'), os.F_OK):
        models['snap_masked'] = _checkpoint(config, MASKED=True)
    benchmarks = config.benchmarks
    models.update(fit_benchmarks(tensor, models=benchmarks['models'],
        mix=benchmarks['mix'], n_lambda=benchmarks['n_lambda'],
        ffn=benchmarks['ffn'], VERBOSE=VERBOSE))
    outputs = {name:_split_panels(model, tensor, quantile, share)
        for name,model in models.items()}
    #-- factor models with expanding-window betas
    if config.paths['factors'] and config.factor_models:
        factors = read_macro_csv(config.paths['factors'])
        base = pd.concat([outputs['snap'][s].assign(split=s) for s in SPLITS],
            ignore_index=True)
        for name,columns in config.factor_models.items():
            predicted = factor_model_predictions(base, factors, columns)
            predicted = predicted.merge(base[['stock_id','month','split',
                'mktcap']], on=['stock_id','month'])
            #-- splits without any covered row are not evaluated
            outputs[name] = {s:predicted[predicted['split'] == s]
                for s in SPLITS if (predicted['split'] == s).any()}
    report = eval_report(outputs, MKTCAP=lambda p: p['mktcap'].values)
    data = report.as_dict()
    data['manifest_hash'] = manifest_hash
    write_json(data, _output(config, 'eval_report.json'))
    report.to_frame().to_csv(_output(config, 'eval_report.csv'), index=False)
    #-- monthly long-short returns of every model on the test split
    series = []
    for name,panels in outputs.items():
        if 'test' not in panels:
            continue
        series.append(long_short_series(panels['test'],
            name='{0}_equal'.format(name)))
    tidy_series(*series).to_csv(_output(config, 'portfolio_returns.csv'),
        index=False)
    frames = [outputs['snap'][s].assign(split=s) for s in SPLITS]
    pd.concat(frames, ignore_index=True).to_csv(_output(config,
        'predictions_snap.csv'), index=False)
    return report

#-- PURPOSE: month indices of a split or of the out-of-sample period
def analysis_months(tensor, split):
    if (split == 'oos'):
        return np.concatenate([split_months(tensor, 'validate'),
            split_months(tensor, 'test')])
    return split_months(tensor, split)

#-- PURPOSE: result file name carrying the split for non-test analyses
def _split_file(base, split, suffix):
    if (split == 'test'):
        return '{0}.{1}'.format(base, suffix)
    return '{0}_{1}.{2}'.format(base, split, suffix)

#-- PURPOSE: estimated alphas of a split (train, validate, test or oos)
def alpha_panel(config, tensor=None, split='test'):
    tensor = load_tensor(config) if tensor is None else tensor
    months = analysis_months(tensor, split)
    unmasked = predict_split(_checkpoint(config), tensor, months)
    masked = predict_split(_checkpoint(config, MASKED=True), tensor, months)
    return estimate_alpha(unmasked, masked)

#-- PURPOSE: mispricing test of masked and unmasked residuals
def cmd_test_alpha(config):
    manifest_hash = write_manifest(config, 'test-alpha')
    split = config.analysis['split']
    panel = alpha_panel(config, split=split)
    panel.to_csv(_output(config, _split_file('alpha_panel', split, 'csv')),
        index=False)
    result = mispricing_test(panel['residual'].values,
        panel['residual_masked'].values)
    data = result.as_dict()
    data['split'] = split
    data['manifest_hash'] = manifest_hash
    write_json(data, _output(config, _split_file('alpha_test', split, 'json')))
    #-- alpha-weighted arbitrage portfolio
    series = arbitrage_series(panel)
    series.to_frame().to_csv(_output(config, _split_file('arbitrage_returns',
        split, 'csv')), index=False)
    if config.paths['factors'] and config.factor_models:
        factors = read_macro_csv(config.paths['factors'])
        fits = arbitrage_regression(series, factors, config.factor_models)
        write_json({k:v.as_dict() for k,v in fits.items()},
            _output(config, _split_file('arbitrage_regression', split,
            'json')))
    return result

#-- PURPOSE: monthly clusters of the arbitrage portfolio
def cmd_cluster(config):
    manifest_hash = write_manifest(config, 'cluster')
    settings = config.clustering
    split = config.analysis['split']
    filename = _output(config, _split_file('alpha_panel', split, 'csv'))
    if os.access(filename, os.F_OK):
        panel = pd.read_csv(filename, dtype=dict(month=str))
    else:
        panel = alpha_panel(config, split=split)
    k = settings['k']
    if settings['elbow']:
        X = panel[['alpha_hat','realized']].values
        X = (X - X.mean(axis=0))/np.where(X.std(axis=0) > 0, X.std(axis=0), 1)
        k, inertia = elbow_detect(X, range(settings['k_min'],
            settings['k_max']+1), seed=config.seed, n_init=settings['n_init'])
        inertia.rename_axis('k').to_csv(_output(config, _split_file('elbow',
            split, 'csv')))
    clusters = monthly_cluster_sharpes(panel, k, seed=config.seed,
        STANDARDIZE=settings['standardize'],
        OUTLIER_IQR=settings['outlier_iqr'], n_init=settings['n_init'])
    clusters.assignments.to_csv(_output(config, _split_file(
        'cluster_assignments', split, 'csv')), index=False)
    clusters.centroids.to_csv(_output(config, _split_file('cluster_centroids',
        split, 'csv')), index=False)
    clusters.tidy().to_csv(_output(config, _split_file('cluster_sharpes',
        split, 'csv')), index=False)
    fits = sharpe_trend(clusters.series)
    data = {key:fit.as_dict() for key,fit in fits.items()}
    data['k'] = k
    data['split'] = split
    data['manifest_hash'] = manifest_hash
    write_json(data, _output(config, _split_file('cluster_trend', split,
        'json')))
    return clusters, fits

#-- PURPOSE: perturbation importance of characteristics and macro states
def cmd_importance(config):
    write_manifest(config, 'importance')
    tensor = load_tensor(config)
    model = _checkpoint(config)
    settings = config.importance
    threads = config.threads or os.cpu_count() or 1
    frames = []
    for scope in ('characteristic','macro'):
        report = importance_report(model, tensor, split=settings['split'],
            scope=scope, seed=config.seed, scale=settings['scale'],
            repetitions=settings['repetitions'], THREADS=threads)
        frames.append(report.frame)
    frame = pd.concat(frames, ignore_index=True)
    frame.to_csv(_output(config, 'importance.csv'), index=False)
    return frame

#-- PURPOSE: summary of every result written to the output directory
def cmd_report(config):
    write_manifest(config, 'report')
    summary = {}
    keys = ['eval_report','alpha_test','cluster_trend',
        'arbitrage_regression','manifest_train','manifest_train_masked']
    #-- analyses of other splits
    for split in ANALYSIS_SPLITS:
        if (split != 'test'):
            keys.extend('{0}_{1}'.format(base, split) for base in
                ('alpha_test','cluster_trend','arbitrage_regression'))
    for key in keys:
        filename = _output(config, '{0}.json'.format(key))
        if os.access(filename, os.F_OK):
            with open(filename, mode='r') as fid:
                summary[key] = json.load(fid)
    write_json(summary, _output(config, 'report.json'))
    return summary

#-- PURPOSE: help module to describe the optional input parameters
def usage():
    print('\nHelp: {0} <command> [options]'.format(os.path.basename(sys.argv[0])))
    print(' commands: {0}'.format(' | '.join(COMMANDS)))
    print(' -C X, --config=X\tYAML run configuration')
    print(' -S X, --seed=X\t\tMaster random seed')
    print(' -P X, --threads=X\tNumber of worker processes')
    print(' -O X, --out=X\t\tOutput directory')
    print(' -M, --masked\t\tTrain the masked model')
    print(' --exclude-microcap=X\tDrop stocks below market-cap quantile X')
    print(' --exclude-share=X\tDrop stocks below share X of total market cap')
    print(' --k=X\t\t\tClusters per month')
    print(' --elbow\t\tChoose the number of clusters by the elbow method')
    print(' --split=X\t\tSplit of test-alpha and cluster (train, validate,')
    print('\t\t\ttest or oos)')
    print(' -V, --verbose\t\tVerbose output of processing run')
    print(' -l, --log\t\tOutput log file')
    today = time.strftime('%Y-%m-%d',time.localtime())
    LOGFILE = 'snap_<command>_{0}.log'.format(today)
    print('    Log file format: {0}\n'.format(LOGFILE))

#-- PURPOSE: configure logging to the terminal and optionally a file
def setup_logging(command, output, VERBOSE=False, LOG=False):
    level = logging.INFO if VERBOSE else logging.WARNING
    logging.basicConfig(level=level, format='%(name)s: %(message)s')
    if LOG:
        os.makedirs(output, exist_ok=True)
        today = time.strftime('%Y-%m-%d',time.localtime())
        LOGFILE = 'snap_{0}_{1}.log'.format(command, today)
        handler = logging.FileHandler(os.path.join(output, LOGFILE))
        handler.setFormatter(logging.Formatter('%(name)s: %(message)s'))
        handler.setLevel(logging.INFO)
        logging.getLogger().addHandler(handler)
        logging.getLogger().setLevel(logging.INFO)

#-- Main program that dispatches the pipeline commands
def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    #-- Read the system arguments listed after the program
    short_options = 'hC:S:P:O:MVl'
    long_options = ['help','config=','seed=','threads=','out=','masked',
        'exclude-microcap=','exclude-share=','k=','elbow','split=','verbose',
        'log']
    try:
        optlist,arglist = getopt.gnu_getopt(argv,short_options,long_options)
    except getopt.GetoptError as exc:
        print('error: {0}'.format(exc), file=sys.stderr)
        return 2

    #-- command line parameters
    CONFIG = None
    MASKED = False
    VERBOSE = False
    LOG = False
    overrides = {}
    try:
        for opt, arg in optlist:
            if opt in ('-h','--help'):
                usage()
                return 0
            elif opt in ('-C','--config'):
                CONFIG = os.path.expanduser(arg)
            elif opt in ('-S','--seed'):
                overrides['seed'] = int(arg)
            elif opt in ('-P','--threads'):
                overrides['threads'] = int(arg)
            elif opt in ('-O','--out'):
                overrides.setdefault('paths', {})['output'] = arg
            elif opt in ('-M','--masked'):
                MASKED = True
            elif opt in ('--exclude-microcap',):
                overrides.setdefault('data', {})['exclude_microcap'] = float(arg)
            elif opt in ('--exclude-share',):
                overrides.setdefault('data', {})['exclude_share'] = float(arg)
            elif opt in ('--k',):
                overrides.setdefault('clustering', {})['k'] = int(arg)
            elif opt in ('--elbow',):
                overrides.setdefault('clustering', {})['elbow'] = True
            elif opt in ('--split',):
                overrides.setdefault('analysis', {})['split'] = arg
            elif opt in ('-V','--verbose'):
                VERBOSE = True
            elif opt in ('-l','--log'):
                LOG = True
    except ValueError as exc:
        print('error: invalid option value ({0})'.format(exc), file=sys.stderr)
        return 2
    if (len(arglist) != 1) or (arglist[0] not in COMMANDS):
        usage()
        return 2
    command = arglist[0]

    try:
        config = load_config(CONFIG, environ=os.environ, overrides=overrides)
        output = os.path.expanduser(config.paths['output'])
        os.makedirs(output, exist_ok=True)
        setup_logging(command, output, VERBOSE=VERBOSE, LOG=LOG)
        if (command == 'simulate'):
            cmd_simulate(config)
        elif (command == 'train'):
            cmd_train(config, MASKED=MASKED, VERBOSE=VERBOSE)
        elif (command == 'evaluate'):
            cmd_evaluate(config, VERBOSE=VERBOSE)
        elif (command == 'test-alpha'):
            cmd_test_alpha(config)
        elif (command == 'cluster'):
            cmd_cluster(config)
        elif (command == 'importance'):
            cmd_importance(config)
        elif (command == 'report'):
            cmd_report(config)
    except (ConfigError, ParseError, OSError) as exc:
        print('error: {0}'.format(exc), file=sys.stderr)
        return 2
    except (SnapError, ArithmeticError) as exc:
        print('error: {0}'.format(exc), file=sys.stderr)
        return 1
    return 0

#-- run main program
if __name__ == '__main__':
    sys.exit(main())
