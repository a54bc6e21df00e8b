#!/usr/bin/env python
u"""
test_cli.py
Run the command line pipeline on a small simulated panel
"""
import os
import json
import yaml
import pytest
import pandas as pd
from snap_toolkit.cli import main
from snap_toolkit.data import load_panel
from snap_toolkit.checkpoint import read_checkpoint, parameter_hash

#-- small run configuration with paths relative to the working directory
CONFIG = dict(
    paths=dict(panel='out/panel.csv', macro='out/macro.csv',
        transforms='out/transforms.csv', output='out'),
    simulate=dict(n_stocks=30, n_months=48, n_chars=4, n_macro=1),
    hyper=dict(hidden_dim=3, window=3, max_epochs=2, batch_months=12),
    benchmarks=dict(models=['ols','lasso','ffn'], n_lambda=5,
        ffn=dict(hidden=3, max_epochs=2)),
    clustering=dict(k=2, n_init=2),
    threads=1,
    seed=3,
)

PIPELINE = [['simulate'], ['train'], ['train','--masked'], ['evaluate'],
    ['test-alpha'], ['cluster'], ['importance'], ['report']]

RESULTS = ['panel.csv','macro.csv','truth.csv','train_log_unmasked.csv',
    'train_log_masked.csv','eval_report.json','eval_report.csv',
    'portfolio_returns.csv','predictions_snap.csv','alpha_panel.csv',
    'alpha_test.json','arbitrage_returns.csv','cluster_assignments.csv',
    'cluster_centroids.csv','cluster_sharpes.csv','cluster_trend.json',
    'importance.csv','report.json','manifest_train.json',
    'manifest_train_masked.json','manifest_evaluate.json']

def write_config(directory, **updates):
    config = dict(CONFIG, **updates)
    with open(os.path.join(directory, 'run.yaml'), mode='w') as fid:
        yaml.safe_dump(config, fid)
    return 'run.yaml'

def run_pipeline(directory, monkeypatch):
    monkeypatch.chdir(directory)
    config = write_config(directory)
    for args in PIPELINE:
        assert main(args + ['--config', config]) == 0, args
    results = {}
    for name in RESULTS:
        with open(os.path.join(directory, 'out', name), mode='rb') as fid:
            results[name] = fid.read()
    model = read_checkpoint(os.path.join(directory, 'out', 'snap_unmasked.h5'))
    return results, parameter_hash(model)

def test_pipeline_determinism(tmp_path, monkeypatch):
    first, second = tmp_path / 'first', tmp_path / 'second'
    first.mkdir()
    second.mkdir()
    results, digest = run_pipeline(str(first), monkeypatch)
    again, digest_again = run_pipeline(str(second), monkeypatch)
    assert digest == digest_again
    for name in RESULTS:
        assert results[name] == again[name], name
    report = json.loads(results['report.json'])
    assert set(report.keys()) >= {'eval_report','alpha_test','cluster_trend'}
    frame = pd.read_csv(os.path.join(str(first), 'out', 'importance.csv'))
    assert set(frame['scope']) == {'characteristic','macro'}
    evaluation = json.loads(results['eval_report.json'])
    assert set(evaluation['metrics'].keys()) == {'snap','snap_masked','ols',
        'lasso','ffn'}

def test_simulate_then_load(tmp_path, monkeypatch):
    monkeypatch.chdir(str(tmp_path))
    config = write_config(str(tmp_path))
    assert main(['simulate', '-C', config, '--seed=4']) == 0
    with open(os.path.join('out', 'manifest_simulate.json')) as fid:
        manifest = json.load(fid)
    assert manifest['seed'] == 4
    panel = pd.read_csv(os.path.join('out', 'panel.csv'))
    assert list(panel.columns[:4]) == ['stock_id','month','excess_return',
        'mktcap']
    assert len(panel) == 30*48
    dataset = load_panel(os.path.join('out', 'panel.csv'),
        os.path.join('out', 'macro.csv'),
        dict(transform_file=os.path.join('out', 'transforms.csv')))
    assert dataset.characteristics == ['char_0','char_1','char_2','char_3']
    assert dataset.macro_names == ['macro_0']
    assert len(dataset.panel) == 30*48

def test_exit_codes(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(str(tmp_path))
    assert main(['-h']) == 0
    assert main(['bogus']) == 2
    assert main([]) == 2
    assert main(['simulate', '--seed=abc']) == 2
    assert main(['simulate', '--unknown']) == 2
    assert main(['test-alpha', '--split=holdout']) == 2
    #-- missing configuration and input files
    assert main(['train', '-C', 'missing.yaml']) == 2
    assert main(['train', '--out', 'out']) == 2
    config = write_config(str(tmp_path),
        paths=dict(panel='none.csv', macro='none.csv', output='out'))
    assert main(['train', '-C', config]) == 2
    assert 'error' in capsys.readouterr().err
    #-- computational failures
    config = write_config(str(tmp_path), data=dict(max_missing_rate=-0.1))
    assert main(['simulate', '-C', config]) == 0
    assert main(['train', '-C', config]) == 1

def test_analysis_splits(tmp_path, monkeypatch):
    monkeypatch.chdir(str(tmp_path))
    config = write_config(str(tmp_path))
    for args in (['simulate'], ['train'], ['train','--masked']):
        assert main(args + ['--config', config]) == 0, args
    for split in ('validate','test','oos'):
        assert main(['test-alpha', '--split={0}'.format(split), '-C',
            config]) == 0, split
    assert main(['cluster', '--split=oos', '-C', config]) == 0
    panels = {split:pd.read_csv(os.path.join('out', name), dtype=dict(
        month=str)) for split,name in [('validate','alpha_panel_validate.csv'),
        ('test','alpha_panel.csv'), ('oos','alpha_panel_oos.csv')]}
    #-- the out-of-sample period joins the validation and test months
    assert len(panels['oos']) == len(panels['validate']) + len(panels['test'])
    assert set(panels['oos']['month']) == set(panels['validate']['month']) | \
        set(panels['test']['month'])
    with open(os.path.join('out', 'alpha_test_oos.json')) as fid:
        result = json.load(fid)
    assert result['split'] == 'oos'
    assert result['alternative']['method'] != result['test']['method']
    assert set(result['normality_p_values'].keys()) == {'unmasked','masked'}
    with open(os.path.join('out', 'cluster_trend_oos.json')) as fid:
        assert json.load(fid)['split'] == 'oos'
    assert main(['report', '-C', config]) == 0
    with open(os.path.join('out', 'report.json')) as fid:
        report = json.load(fid)
    assert {'alpha_test','alpha_test_validate','alpha_test_oos',
        'cluster_trend_oos'} <= set(report.keys())
