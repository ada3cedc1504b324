"""
test_main.py

This module defines unit tests for the main.py module.
"""

import io
import json
from unittest.mock import MagicMock
from unittest.mock import patch
import pytest
from carpet_lab.errors import DepthBudgetExceededError
from carpet_lab.main import main
from carpet_lab.main import parse_arguments


# pylint: disable=redefined-outer-name
@pytest.fixture()
def mock_report_generator():
    """Returns a mock ReportGenerator object."""

    report_generator = MagicMock()
    report_generator.generate_report.return_value = {'command': 'check', 'passed': True, 'files': []}
    return report_generator


def test_parse_arguments():
    """Test defaults and overrides of the command line."""

    args = parse_arguments(['dim', '--preset', 'unit_square'])
    assert (args.command, args.preset, args.out) == ('dim', 'unit_square', '.')
    assert (args.depth, args.tol) == (None, 1e-12)

    args = parse_arguments(['check', '--input', '-', '--depth', '5', '--verbose'])
    assert (args.input, args.depth, args.verbose) == ('-', 5, True)

    with pytest.raises(SystemExit):
        parse_arguments(['unknown'])


@patch('carpet_lab.main.ReportGenerator')
def test_main(mock_rpt_gen_cls, mock_report_generator, capsys):
    """Test main function."""

    mock_rpt_gen_cls.return_value = mock_report_generator

    assert main(['check', '--preset', 'staggered_columns']) == 0

    mock_report_generator.generate_report.assert_called_once_with()
    config, spec = mock_rpt_gen_cls.call_args.args
    assert config.command == 'check'
    assert spec.n_maps == 4
    assert json.loads(capsys.readouterr().out)['passed'] is True


@patch('carpet_lab.main.ReportGenerator')
def test_main_failed_bound(mock_rpt_gen_cls, mock_report_generator):
    """Test that a failed bound gives exit code 1."""

    mock_report_generator.generate_report.return_value = {'passed': False}
    mock_rpt_gen_cls.return_value = mock_report_generator

    assert main(['check', '--preset', 'staggered_columns']) == 1


@patch('carpet_lab.main.ReportGenerator')
def test_main_budget_exceeded(mock_rpt_gen_cls, mock_report_generator):
    """Test that an exceeded budget gives exit code 3."""

    mock_report_generator.generate_report.side_effect = DepthBudgetExceededError('mock-budget')
    mock_rpt_gen_cls.return_value = mock_report_generator

    assert main(['dim', '--preset', 'unit_square']) == 3


@pytest.mark.parametrize('document', [
    '{"maps": [',
    '{"maps": [{"a1": 2, "a2": 0.5}, {"a1": 0.5, "a2": 0.5, "b1": 0.5}]}',
    '{"maps": [{"a1": 0.5, "a2": 0.5}]}'
])
def test_main_input_errors(document, monkeypatch, capsys):
    """Test that malformed or invalid documents give exit code 2 and no summary."""

    monkeypatch.setattr('sys.stdin', io.StringIO(document))

    assert main(['check', '--input', '-']) == 2
    assert capsys.readouterr().out == ''


def test_main_check(tmp_path, capsys):
    """Test a full check run on a shipped preset."""

    assert main(['check', '--preset', 'staggered_columns', '--out', str(tmp_path)]) == 0

    summary = json.loads(capsys.readouterr().out)
    assert summary['passed'] is True
    assert summary['files'] == ['conditions.csv', 'constants.csv', 'witnesses.csv']
    assert (tmp_path / 'conditions.csv').is_file()
