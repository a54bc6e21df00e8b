import pytest

def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
        help='run slow Monte Carlo and training checks')

def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long Monte Carlo or training check')

def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow option to run')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)
