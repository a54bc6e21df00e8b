#!/usr/bin/env python
u"""
data.py
Reads, imputes, normalizes and splits unbalanced stock-month panels of
    excess returns and firm characteristics with a monthly table of
    macroeconomic states, and synthesizes panels with known pricing truth

CALLING SEQUENCE:
    dataset = load_panel(characteristics_file, macro_file, config)
    tensor = panel_tensor(dataset)
    batch = window_batch(tensor, months, window)
    dataset = synthesize(SyntheticSpec(n_stocks=200, n_months=240, seed=7))

INPUTS:
    characteristics_file: csv with header
        stock_id,month,excess_return,mktcap,<char_1..char_K>
        month is an ISO YYYY-MM string and missing values are empty fields.
        excess_return on the row for month t is realized in month t+1
    macro_file: csv with header month,<macro_1..macro_J>

OPTIONS (config dictionary):
    transform_file: csv of series,transform_code for the macro series
    split_file: csv of month,split labels (overrides split dates)
    validate_start: first month (YYYY-MM) of the validation split
    test_start: first month (YYYY-MM) of the test split
    train_frac, validate_frac: split fractions when no dates are given
    impute: replace missing characteristics by cross-sectional medians
    normalize: rank-normalize characteristics to [-1,1] within each month
    standardize_macro: standardize macro series with training statistics
    max_missing_rate: largest tolerated missing share of a characteristic

OUTPUTS:
    PanelDataset with the preprocessed panel, macro table and split labels

NOTES:
    Characteristics are mapped within each month to (rank/(n+1))*2 - 1
        using average ranks for ties
    A month on a split boundary belongs to the later split
    Average characteristics for the factor premium branch are computed
        after normalization
    Macro transforms are applied before any split statistic is computed

PYTHON DEPENDENCIES:
    numpy: Scientific Computing Tools For Python
        https://numpy.org
        https://numpy.org/doc/stable/user/numpy-for-matlab-users.html
    pandas: Python Data Analysis Library
        https://pandas.pydata.org/

PROGRAM DEPENDENCIES:
    numerics.py: random number generation

UPDATE HISTORY:
    Written 10/2026
"""
import os
import re
import logging
import numpy as np
import pandas as pd
from snap_toolkit.errors import ParseError, InputError, AlignmentError, \
    ConfigError, ParameterError
from snap_toolkit.numerics import new_rng

#-- leading columns of the characteristics file
PANEL_COLUMNS = ['stock_id','month','excess_return','mktcap']
#-- stationarity transforms for macro series
TRANSFORMS = ('level','diff','second_diff','log','log_diff','log_second_diff',
    'pct_change')
#-- split labels in chronological order
SPLITS = ('train','validate','test')
#-- regular expression for ISO months
rx_month = re.compile(r'^\d{4}-(0[1-9]|1[0-2])$')

class PanelDataset(object):
    """
    Preprocessed stock-month panel with macro table and split labels

    panel: DataFrame of stock_id, month, excess_return, mktcap, characteristics
    macro: DataFrame indexed by month of macro states
    split: Series indexed by month of split labels
    """
    def __init__(self, panel, macro, characteristics, macro_names, split,
        transforms=None, quality=None, truth=None):
        self.panel = panel
        self.macro = macro
        self.characteristics = list(characteristics)
        self.macro_names = list(macro_names)
        self.split = split
        self.transforms = transforms or {k:'level' for k in macro_names}
        self.quality = quality
        self.truth = truth

    @property
    def months(self):
        return sorted(self.panel['month'].unique())

#-- PURPOSE: verify that a column holds ISO months
def check_months(values, column='month', offset=2):
    for i,val in enumerate(values):
        if not rx_month.match(str(val)):
            raise ParseError('invalid month {0!r}'.format(val), row=i+offset,
                column=column)

#-- PURPOSE: convert string columns to floats reporting the first bad cell
def _numeric_columns(frame, columns, offset=2):
    out = {}
    for col in columns:
        raw = frame[col].astype(str).str.strip()
        values = pd.to_numeric(raw.replace('', np.nan), errors='coerce')
        bad = values.isna() & (raw != '') & (raw.str.lower() != 'nan')
        if bad.any():
            i = int(np.flatnonzero(bad.values)[0])
            raise ParseError('non-numeric value {0!r}'.format(raw.iloc[i]),
                row=i+offset, column=col)
        out[col] = values.astype(np.float64).values
    return out

#-- PURPOSE: read the characteristics csv and check its schema
def read_panel_csv(FILENAME):
    frame = pd.read_csv(os.path.expanduser(FILENAME), dtype=str,
        keep_default_na=False)
    columns = list(frame.columns)
    if (columns[:4] != PANEL_COLUMNS) or (len(columns) < 5):
        raise ParseError('characteristics header must start with {0} and '
            'list at least one characteristic'.format(','.join(PANEL_COLUMNS)),
            row=1, column=None)
    characteristics = columns[4:]
    check_months(frame['month'].values)
    ids = frame['stock_id'].astype(str).str.strip()
    if (ids == '').any():
        i = int(np.flatnonzero((ids == '').values)[0])
        raise ParseError('missing stock_id', row=i+2, column='stock_id')
    values = _numeric_columns(frame, columns[2:])
    try:
        ids = pd.to_numeric(ids)
    except ValueError:
        pass
    panel = pd.DataFrame(dict(stock_id=ids.values,
        month=frame['month'].values))
    for col in columns[2:]:
        panel[col] = values[col]
    duplicated = panel.duplicated(['stock_id','month'])
    if duplicated.any():
        i = int(np.flatnonzero(duplicated.values)[0])
        raise ParseError('duplicate stock-month row', row=i+2,
            column='stock_id')
    return panel, characteristics

#-- PURPOSE: read the macro csv indexed by month
def read_macro_csv(FILENAME):
    frame = pd.read_csv(os.path.expanduser(FILENAME), dtype=str,
        keep_default_na=False)
    if (frame.columns[0] != 'month'):
        raise ParseError('macro header must start with month', row=1,
            column=frame.columns[0])
    check_months(frame['month'].values)
    names = list(frame.columns[1:])
    values = _numeric_columns(frame, names)
    macro = pd.DataFrame(values, index=frame['month'].values, columns=names)
    macro.index.name = 'month'
    if macro.index.has_duplicates:
        raise ParseError('duplicate macro month', row=None, column='month')
    return macro.sort_index()

#-- PURPOSE: read the series,transform_code sidecar
def read_transform_map(FILENAME):
    frame = pd.read_csv(os.path.expanduser(FILENAME), dtype=str)
    if list(frame.columns[:2]) != ['series','transform_code']:
        raise ParseError('transform header must be series,transform_code',
            row=1, column=None)
    transforms = {}
    for i,(series,code) in enumerate(zip(frame['series'],
        frame['transform_code'])):
        if code not in TRANSFORMS:
            raise ParseError('unknown transform {0!r}'.format(code), row=i+2,
                column='transform_code')
        transforms[series] = code
    return transforms

#-- PURPOSE: stationarity transform of a macro series
def apply_transform(series, code):
    x = pd.Series(series, dtype=np.float64)
    if code.startswith('log'):
        if (x.dropna() <= 0).any():
            raise InputError('log transform requires positive values')
        x = np.log(x)
    if code in ('level','log'):
        return x
    elif code in ('diff','log_diff'):
        return x.diff()
    elif code in ('second_diff','log_second_diff'):
        return x.diff().diff()
    elif (code == 'pct_change'):
        return x.pct_change()
    raise ParameterError('unknown transform {0}'.format(code))

#-- PURPOSE: per-characteristic missing rates
def missing_summary(panel, characteristics):
    rows = []
    for c in characteristics:
        missing = panel[c].isna()
        by_month = missing.groupby(panel['month']).all()
        rows.append(dict(characteristic=c, missing=int(missing.sum()),
            observations=int(len(missing)),
            missing_rate=float(missing.mean()) if len(missing) else 0.0,
            months_all_missing=int(by_month.sum())))
    return pd.DataFrame(rows, columns=['characteristic','missing',
        'observations','missing_rate','months_all_missing'])

#-- PURPOSE: fill missing characteristics with the cross-sectional median
#-- of the same month or, for months without observations, of the latest
#-- earlier month
def impute_medians(panel, characteristics, RANKED=False):
    """
    Arguments
    ---------
    panel: DataFrame with month and characteristic columns
    characteristics: columns to impute

    Keyword arguments
    -----------------
    RANKED: characteristics are already rank normalized so that months
        without any median take the center of the rank scale
    """
    logger = logging.getLogger(__name__)
    panel = panel.copy()
    for c in characteristics:
        medians = panel.groupby('month')[c].median().sort_index()
        filled = medians.ffill()
        fallback = medians.isna() & filled.notna()
        if fallback.any():
            logger.info('{0}: {1:d} months use an earlier median'.format(c,
                int(fallback.sum())))
        #-- characteristics missing in every earlier month as well
        empty = filled.index[filled.isna()]
        if len(empty) and not RANKED:
            raise InputError('{0} has no median at or before {1}'.format(c,
                empty[0]))
        filled = filled.fillna(0.0)
        missing = panel[c].isna()
        panel.loc[missing, c] = panel.loc[missing, 'month'].map(filled).values
    return panel

#-- PURPOSE: map characteristics within each month to [-1,1] by rank
def rank_normalize(panel, characteristics):
    panel = panel.copy()
    grouped = panel.groupby('month')[characteristics]
    ranks = grouped.rank(method='average')
    counts = grouped.transform('count')
    panel[characteristics] = (ranks/(counts + 1.0))*2.0 - 1.0
    return panel

#-- PURPOSE: average characteristics over the stocks present in a month
def cross_sectional_means(panel, month, characteristics=None):
    if characteristics is None:
        characteristics = [c for c in panel.columns if c not in PANEL_COLUMNS]
    rows = panel[panel['month'] == month]
    if rows.empty:
        raise InputError('no stocks in month {0}'.format(month))
    return rows[characteristics].mean(axis=0).values

#-- PURPOSE: label months as train, validate or test
def assign_splits(months, validate_start=None, test_start=None,
    train_frac=0.72, validate_frac=0.10):
    months = sorted(set(months))
    if (validate_start is None) != (test_start is None):
        raise ConfigError('give both validate_start and test_start')
    if validate_start is None:
        n = len(months)
        n_train = int(np.floor(train_frac*n))
        n_valid = int(np.floor(validate_frac*n))
        if (n_train < 1) or (n_valid < 1) or (n_train + n_valid >= n):
            raise ConfigError('split fractions leave an empty split')
        validate_start = months[n_train]
        test_start = months[n_train + n_valid]
    check_months([validate_start, test_start], column='split')
    if not (validate_start < test_start):
        raise ConfigError('validation must start before the test split')
    labels = ['train' if (m < validate_start) else 'validate'
        if (m < test_start) else 'test' for m in months]
    return pd.Series(labels, index=months, name='split')

#-- PURPOSE: check month labels read from a split file
def check_split_labels(split):
    """
    Labels must be train, validate or test and cover contiguous blocks of
        months in that order
    """
    unknown = sorted(set(split.values) - set(SPLITS))
    if unknown:
        raise InputError('unknown split labels: {0}'.format(
            ','.join(map(str, unknown))))
    if split.index.has_duplicates:
        raise InputError('split file lists a month more than once')
    split = split.sort_index()
    order = np.array([SPLITS.index(label) for label in split.values])
    if np.any(np.diff(order) < 0):
        i = int(np.flatnonzero(np.diff(order) < 0)[0]) + 1
        raise InputError('split labels are not contiguous in train, '
            'validate, test order at {0}'.format(split.index[i]))
    return split

#-- PURPOSE: standardize macro columns with training-split statistics
def standardize_macro(macro, train_months):
    train = macro.loc[macro.index.isin(train_months)]
    mean = train.mean(axis=0)
    std = train.std(axis=0, ddof=1).replace(0.0, 1.0).fillna(1.0)
    #-- leading rows lost to differencing sit at the training mean
    return ((macro - mean)/std).fillna(0.0)

#-- PURPOSE: shared preprocessing of raw panel and macro frames
def build_dataset(panel, characteristics, macro, transforms=None, config={}):
    logger = logging.getLogger(__name__)
    transforms = transforms or {k:'level' for k in macro.columns}
    panel = panel.sort_values(['month','stock_id'], kind='mergesort')
    panel = panel.reset_index(drop=True)
    #-- data-quality report before imputation
    quality = missing_summary(panel, characteristics)
    max_missing = config.get('max_missing_rate', 0.5)
    too_sparse = quality[quality['missing_rate'] > max_missing]
    if not too_sparse.empty:
        raise InputError('characteristics missing above {0:g}: {1}'.format(
            max_missing, ','.join(too_sparse['characteristic'])))
    #-- ranks skip missing values so imputation follows on the rank scale
    if config.get('normalize', True):
        panel = rank_normalize(panel, characteristics)
    if config.get('impute', True):
        panel = impute_medians(panel, characteristics,
            RANKED=config.get('normalize', True))
    elif panel[characteristics].isna().any().any():
        raise InputError('missing characteristics require imputation')
    #-- split labels
    if config.get('split_file'):
        frame = pd.read_csv(os.path.expanduser(config['split_file']), dtype=str)
        split = check_split_labels(pd.Series(frame['split'].values,
            index=frame['month'].values, name='split'))
    else:
        split = assign_splits(panel['month'].unique(),
            validate_start=config.get('validate_start'),
            test_start=config.get('test_start'),
            train_frac=config.get('train_frac', 0.72),
            validate_frac=config.get('validate_frac', 0.10))
    missing_months = set(panel['month']) - set(split.index)
    if missing_months:
        raise AlignmentError('months without split labels: {0}'.format(
            ','.join(sorted(missing_months)[:5])))
    #-- macro transforms then training statistics
    for name in macro.columns:
        code = transforms.get(name, 'level')
        if code not in TRANSFORMS:
            raise ConfigError('unknown transform {0} for {1}'.format(code,name))
    macro = pd.DataFrame({name:apply_transform(macro[name].values,
        transforms.get(name, 'level')).values for name in macro.columns},
        index=macro.index, columns=macro.columns)
    absent = sorted(set(panel['month']) - set(macro.index))
    if absent:
        raise AlignmentError('macro table misses months {0}'.format(
            ','.join(absent[:5])))
    if config.get('standardize_macro', True):
        train_months = split.index[split.values == 'train']
        macro = standardize_macro(macro, train_months)
    elif macro.isna().any().any():
        raise InputError('macro table contains missing values')
    logger.info('panel: {0:d} rows, {1:d} stocks, {2:d} months'.format(
        len(panel), panel['stock_id'].nunique(), panel['month'].nunique()))
    return PanelDataset(panel, macro, characteristics, list(macro.columns),
        split, transforms=transforms, quality=quality)

#-- PURPOSE: read and preprocess the characteristics and macro files
def load_panel(characteristics_file, macro_file, config={}):
    panel, characteristics = read_panel_csv(characteristics_file)
    macro = read_macro_csv(macro_file)
    transforms = None
    if config.get('transform_file'):
        transforms = read_transform_map(config['transform_file'])
        unknown = set(transforms.keys()) - set(macro.columns)
        if unknown:
            raise ConfigError('transforms for unknown series: {0}'.format(
                ','.join(sorted(unknown))))
    return build_dataset(panel, characteristics, macro, transforms=transforms,
        config=config)

#-- PURPOSE: write the preprocessed dataset so that load_panel with
#-- normalization disabled reads it back unchanged
def save_panel(dataset, directory):
    os.makedirs(directory, exist_ok=True)
    files = {}
    files['panel'] = os.path.join(directory, 'panel.csv')
    files['macro'] = os.path.join(directory, 'macro.csv')
    files['transforms'] = os.path.join(directory, 'transforms.csv')
    files['splits'] = os.path.join(directory, 'splits.csv')
    write_panel_csv(dataset.panel, dataset.characteristics, files['panel'])
    write_macro_csv(dataset.macro, files['macro'])
    pd.DataFrame(dict(series=dataset.macro_names,
        transform_code=['level']*len(dataset.macro_names))).to_csv(
        files['transforms'], index=False)
    pd.DataFrame(dict(month=dataset.split.index, split=dataset.split.values)
        ).to_csv(files['splits'], index=False)
    return files

#-- PURPOSE: configuration that reads a saved dataset back unchanged
def saved_config(files):
    return dict(transform_file=files['transforms'], split_file=files['splits'],
        impute=False, normalize=False, standardize_macro=False,
        max_missing_rate=1.0)

def write_panel_csv(panel, characteristics, FILENAME):
    panel[PANEL_COLUMNS + list(characteristics)].to_csv(FILENAME, index=False,
        na_rep='')

def write_macro_csv(macro, FILENAME):
    macro.to_csv(FILENAME, index=True, index_label='month', na_rep='')

#-- PURPOSE: market excess return realized in each month
#-- the row for month t carries the return realized in month t+1
def market_excess_return(panel, months):
    rows = panel[np.isfinite(panel['excess_return'])]
    caps = rows['mktcap'].where(rows['mktcap'] > 0)
    value_weighted = caps.notna().all() and not rows.empty
    weight = caps if value_weighted else pd.Series(1.0, index=rows.index)
    totals = (weight*rows['excess_return']).groupby(rows['month']).sum()
    market = totals/weight.groupby(rows['month']).sum()
    realized = pd.Series(np.nan, index=months)
    for t in range(1, len(months)):
        realized.iloc[t] = market.get(months[t-1], np.nan)
    return realized

#-- PURPOSE: drop small stocks by monthly market-cap quantile or by share
#-- of total monthly market capitalization
def exclude_microcaps(panel, quantile=None, share=None):
    if (quantile is None) and (share is None):
        return panel
    caps = panel['mktcap']
    if caps.isna().any():
        raise InputError('market caps are required to exclude microcaps')
    keep = np.ones(len(panel), dtype=bool)
    if quantile is not None:
        if not (0.0 <= quantile < 1.0):
            raise ParameterError('microcap quantile must be in [0,1)')
        cutoff = caps.groupby(panel['month']).transform(
            lambda x: x.quantile(quantile))
        keep &= (caps >= cutoff).values
    if share is not None:
        total = caps.groupby(panel['month']).transform('sum')
        keep &= (caps > share*total).values
    return panel[keep].reset_index(drop=True)

class PanelTensor(object):
    """
    Dense month by stock arrays of a dataset over consecutive calendar months

    chars: (M, S, K) characteristics (zero where absent)
    present: (M, S) stock observed in month
    target: (M, S) excess return realized in the next month
    mktcap: (M, S) market capitalization at month end
    common: (M, F) average characteristics, macro states and market return
    split: (M,) split label of each month
    """
    def __init__(self, months, stock_ids, chars, present, target, mktcap,
        common, split, char_names, common_names):
        self.months = list(months)
        self.stock_ids = np.asarray(stock_ids)
        self.chars = chars
        self.present = present
        self.target = target
        self.mktcap = mktcap
        self.common = common
        self.split = np.asarray(split)
        self.char_names = list(char_names)
        self.common_names = list(common_names)

    def copy(self):
        return PanelTensor(self.months, self.stock_ids.copy(),
            self.chars.copy(), self.present.copy(), self.target.copy(),
            self.mktcap.copy(), self.common.copy(), self.split.copy(),
            self.char_names, self.common_names)

#-- PURPOSE: build the dense tensor of a dataset
def panel_tensor(dataset, INCLUDE_MARKET=True):
    panel = dataset.panel
    first, last = min(panel['month']), max(panel['month'])
    months = list(pd.period_range(first, last, freq='M').strftime('%Y-%m'))
    stock_ids = np.sort(panel['stock_id'].unique())
    M, S, K = len(months), len(stock_ids), len(dataset.characteristics)
    mi = pd.Index(months).get_indexer(panel['month'])
    si = pd.Index(stock_ids).get_indexer(panel['stock_id'])
    chars = np.zeros((M, S, K))
    present = np.zeros((M, S), dtype=bool)
    target = np.full((M, S), np.nan)
    mktcap = np.full((M, S), np.nan)
    chars[mi,si,:] = panel[dataset.characteristics].values
    present[mi,si] = True
    target[mi,si] = panel['excess_return'].values
    mktcap[mi,si] = panel['mktcap'].values
    #-- average characteristics of the stocks present each month
    counts = present.sum(axis=1)
    zbar = np.zeros((M, K))
    valid, = np.nonzero(counts > 0)
    zbar[valid] = chars[valid].sum(axis=1)/counts[valid,np.newaxis]
    macro = dataset.macro.reindex(months)
    observed = macro.notna().all(axis=1).values
    if np.any(~observed & (counts > 0)):
        raise AlignmentError('macro states missing for observed months')
    common = [zbar, macro.fillna(0.0).values]
    common_names = ['mean_{0}'.format(c) for c in dataset.characteristics]
    common_names.extend(dataset.macro_names)
    split = dataset.split.reindex(months).ffill().bfill().values
    if INCLUDE_MARKET:
        market = market_excess_return(panel, months)
        train = market[split == 'train']
        sd = train.std(ddof=1)
        sd = 1.0 if not np.isfinite(sd) or (sd == 0) else sd
        market = ((market - train.mean())/sd).fillna(0.0)
        common.append(market.values[:,np.newaxis])
        common_names.append('market_excess_return')
    return PanelTensor(months, stock_ids, chars, present, target, mktcap,
        np.concatenate(common, axis=1), split, dataset.characteristics,
        common_names)

#-- PURPOSE: month indices of a split holding at least one sample
def split_months(tensor, split):
    if split not in SPLITS:
        raise InputError('unknown split {0}'.format(split))
    samples = (tensor.present & np.isfinite(tensor.target)).any(axis=1)
    months, = np.nonzero((tensor.split == split) & samples)
    return months

class WindowBatch(object):
    """
    Rolling windows for every sample of a set of months

    stock_seq: (W, B, K) stock characteristics ending at each sample month
    stock_valid: (W, B) months inside the panel with the stock present
    common_seq: (W, M, F) common inputs ending at each batch month
    common_valid: (W, M) months inside the panel
    month_pos: (B,) position of each sample month in the batch months
    month_idx: (M,) tensor month index of each batch month
    stock_idx: (B,) tensor stock index of each sample
    target: (B,) realized excess return of each sample
    """
    def __init__(self, stock_seq, stock_valid, common_seq, common_valid,
        month_pos, month_idx, stock_idx, target):
        self.stock_seq = stock_seq
        self.stock_valid = stock_valid
        self.common_seq = common_seq
        self.common_valid = common_valid
        self.month_pos = month_pos
        self.month_idx = month_idx
        self.stock_idx = stock_idx
        self.target = target

#-- PURPOSE: assemble the rolling windows for all samples of some months
def window_batch(tensor, months, window):
    month_idx = np.asarray(months, dtype=int)
    if (window < 1):
        raise InputError('window must be at least one month')
    samples = tensor.present & np.isfinite(tensor.target)
    pos, stock = [], []
    for j,m in enumerate(month_idx):
        s, = np.nonzero(samples[m])
        pos.append(np.full(len(s), j, dtype=int))
        stock.append(s)
    month_pos = np.concatenate(pos) if pos else np.zeros((0), dtype=int)
    stock_idx = np.concatenate(stock) if stock else np.zeros((0), dtype=int)
    lag = np.arange(window)[:,np.newaxis] - (window - 1)
    #-- stock windows
    tidx = month_idx[month_pos][np.newaxis,:] + lag
    inside = (tidx >= 0)
    tclip = np.maximum(tidx, 0)
    stock_valid = inside & tensor.present[tclip, stock_idx[np.newaxis,:]]
    stock_seq = tensor.chars[tclip, stock_idx[np.newaxis,:], :]
    stock_seq = np.where(stock_valid[:,:,np.newaxis], stock_seq, 0.0)
    #-- common windows
    cidx = month_idx[np.newaxis,:] + lag
    common_valid = (cidx >= 0)
    common_seq = tensor.common[np.maximum(cidx, 0)]
    common_seq = np.where(common_valid[:,:,np.newaxis], common_seq, 0.0)
    target = tensor.target[month_idx[month_pos], stock_idx]
    return WindowBatch(stock_seq, stock_valid, common_seq, common_valid,
        month_pos, month_idx, stock_idx, target)

class SyntheticSpec(object):
    """
    Data generating process of a synthetic panel

    form: functional form of alpha, beta and lambda (linear, additive, neural)
    noise_sd: residual standard deviation (derived from oracle_r2 if None)
    oracle_r2: target predictive R^2 of the true expected returns
    alpha_scale: dispersion of the true alphas (0 gives alpha = 0)
    alpha_mean: cross-sectional level of the true alphas
    alpha_decay: e-folding months of the alpha dispersion (None for constant)
    missing_rate: share of stock-months deleted to unbalance the panel
    """
    defaults = dict(n_stocks=200, n_months=240, n_chars=10, n_macro=5,
        form='linear', noise_sd=None, oracle_r2=0.1, alpha_scale=0.01,
        alpha_mean=0.0, beta_scale=0.5, lambda_mean=0.01, lambda_scale=0.01,
        persistence=0.9, macro_persistence=0.9, missing_rate=0.0,
        alpha_decay=None,
        start='1970-01', train_frac=0.72, validate_frac=0.10, seed=0)
    forms = ('linear','additive','neural')

    def __init__(self, **kwargs):
        unknown = set(kwargs.keys()) - set(self.defaults.keys())
        if unknown:
            raise ConfigError('unknown synthetic settings: {0}'.format(
                ','.join(sorted(unknown))))
        for key,val in self.defaults.items():
            setattr(self, key, kwargs.get(key, val))
        if self.form not in self.forms:
            raise ConfigError('form must be one of {0}'.format(self.forms))
        if (self.n_chars < 4) or (self.n_macro < 1):
            raise ConfigError('synthetic panels need at least 4 '
                'characteristics and 1 macro state')
        if (self.noise_sd is None) and not (0.0 < self.oracle_r2 <= 1.0):
            raise ConfigError('oracle_r2 must be in (0,1]')

    def as_dict(self):
        return {key:getattr(self, key) for key in self.defaults.keys()}

#-- PURPOSE: AR(1) series with unit stationary variance along axis 0
def _ar1(rng, shape, rho):
    x = np.zeros(shape)
    x[0] = rng.standard_normal(shape[1:])
    scale = np.sqrt(1.0 - rho**2)
    for t in range(1, shape[0]):
        x[t] = rho*x[t-1] + scale*rng.standard_normal(shape[1:])
    return x

#-- PURPOSE: fixed random tanh network standardized over its inputs
def _random_network(rng, x, width=8):
    V = rng.standard_normal((x.shape[1], width))/np.sqrt(x.shape[1])
    v = rng.standard_normal(width)/np.sqrt(width)
    y = np.dot(np.tanh(2.0*np.dot(x, V)), v)
    return (y - y.mean())/max(y.std(), 1e-12)

#-- PURPOSE: true alpha, beta and lambda of a synthetic specification
def _true_functions(spec, rng, u, m):
    if (spec.form == 'linear'):
        alpha = u[:,1]
        beta = u[:,3]
        lam = m[:,0]
    elif (spec.form == 'additive'):
        alpha = 1.5*u[:,1]**2 - 0.5
        beta = np.sin(np.pi*u[:,3]/2.0)
        lam = np.tanh(2.0*m[:,0])
    elif (spec.form == 'neural'):
        alpha = _random_network(rng, u)
        beta = _random_network(rng, u)
        lam = _random_network(rng, m)
    alpha = spec.alpha_mean + spec.alpha_scale*alpha
    beta = 1.0 + spec.beta_scale*beta
    lam = spec.lambda_mean + spec.lambda_scale*lam
    return alpha, beta, lam

#-- PURPOSE: generate a panel with known alpha, beta and lambda
def synthesize(spec):
    rng = new_rng(spec.seed)
    T, N, K, J = spec.n_months, spec.n_stocks, spec.n_chars, spec.n_macro
    months = list(pd.period_range(spec.start, periods=T,
        freq='M').strftime('%Y-%m'))
    z = _ar1(rng, (T, N, K), spec.persistence)
    m = _ar1(rng, (T, J), spec.macro_persistence)
    size = 1.5*rng.standard_normal(N)[np.newaxis,:] + \
        0.3*_ar1(rng, (T, N), spec.persistence)
    present = rng.random((T, N)) >= spec.missing_rate
    ti, si = np.nonzero(present)
    characteristics = ['char_{0:d}'.format(k) for k in range(K)]
    macro_names = ['macro_{0:d}'.format(j) for j in range(J)]
    panel = pd.DataFrame(dict(stock_id=si + 1, month=np.array(months)[ti],
        excess_return=np.zeros(len(ti)), mktcap=np.exp(10.0 + size[ti,si])))
    for k,c in enumerate(characteristics):
        panel[c] = z[ti,si,k]
    #-- truth is defined on the normalized characteristics the model sees
    u = rank_normalize(panel, characteristics)[characteristics].values
    alpha, beta, lam_month = _true_functions(spec, rng, u, m)
    lam = lam_month[ti]
    if spec.alpha_decay is not None:
        alpha = alpha*np.exp(-ti/float(spec.alpha_decay))
    signal = alpha + beta*lam
    if spec.noise_sd is None:
        noise_sd = np.sqrt(np.mean(signal**2)*(1.0 - spec.oracle_r2)/
            spec.oracle_r2)
    else:
        noise_sd = spec.noise_sd
    panel['excess_return'] = signal + noise_sd*rng.standard_normal(len(ti))
    macro = pd.DataFrame(m, index=months, columns=macro_names)
    macro.index.name = 'month'
    truth = pd.DataFrame(dict(stock_id=panel['stock_id'].values,
        month=panel['month'].values, alpha=alpha, beta=beta,
        expected=signal))
    truth['lambda'] = lam
    truth = truth[['stock_id','month','alpha','beta','lambda','expected']]
    config = dict(train_frac=spec.train_frac, validate_frac=spec.validate_frac)
    dataset = build_dataset(panel, characteristics, macro, config=config)
    dataset.truth = truth.sort_values(['month','stock_id'],
        kind='mergesort').reset_index(drop=True)
    dataset.raw_panel = panel
    dataset.raw_macro = macro
    dataset.noise_sd = noise_sd
    return dataset
