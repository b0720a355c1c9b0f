import json

import pytest

from errors import InvalidInputError, MalformedInputError
from input_validation import DEFAULT_CONFIG, InputValidator, load_config


class TestOperatorSpec:
    def test_decay_spec_with_default_scale(self):
        parsed = InputValidator.parse_operator_spec('decay:n=500,r=0.5')
        assert parsed == {'kind': 'decay', 'n': 500, 'r': 0.5, 'scale': 1.0}

    def test_decay_spec_full(self):
        parsed = InputValidator.parse_operator_spec(' decay: n=5000 , r=0.5, scale=0.99 ')
        assert parsed['n'] == 5000 and parsed['scale'] == 0.99

    def test_householder_and_mm(self):
        assert InputValidator.parse_operator_spec('householder:file=eigs.txt')['file'] == 'eigs.txt'
        assert InputValidator.parse_operator_spec('mm:file=a/b.mtx')['file'] == 'a/b.mtx'

    def test_identity(self):
        assert InputValidator.parse_operator_spec('identity:n=3,c=2') == {'kind': 'identity', 'n': 3, 'c': 2.0}

    @pytest.mark.parametrize('spec', [
        'decay',
        'gauss:n=3',
        'decay:n=3',
        'decay:n=3,r=1,n=4',
        'decay:n=three,r=1',
        'decay:n=3,r=1,color=red',
        'identity:n=3;c=1',
    ])
    def test_malformed_specs(self, spec):
        with pytest.raises(MalformedInputError):
            InputValidator.parse_operator_spec(spec)


class TestScalarValidation:
    @pytest.mark.parametrize('value', [0, 1, -0.1, 1.5, float('nan'), 'abc', True])
    def test_open_unit_rejects(self, value):
        with pytest.raises(InvalidInputError):
            InputValidator.validate_open_unit(value, 'epsilon')

    def test_open_unit_accepts(self):
        assert InputValidator.validate_open_unit('0.25', 'eta') == 0.25

    @pytest.mark.parametrize('value', [True, 1.5, 0, '2.0', None])
    def test_positive_int_rejects(self, value):
        with pytest.raises(InvalidInputError):
            InputValidator.validate_positive_int(value, 'n')

    def test_positive_int_accepts_digit_strings(self):
        assert InputValidator.validate_positive_int(' 12 ', 'n') == 12
        assert InputValidator.validate_positive_int(0, 'seed', minimum=0) == 0

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidInputError, match='not found'):
            InputValidator.validate_file_path(tmp_path / 'nope.txt')


class TestLoadConfig:
    def test_missing_file_uses_defaults(self, tmp_path, monkeypatch):
        monkeypatch.delenv('SLQ_CONFIG', raising=False)
        monkeypatch.delenv('SLQ_ND3K_PATH', raising=False)
        config = load_config(tmp_path / 'missing.json')
        assert config == DEFAULT_CONFIG

    def test_partial_override_is_merged(self, tmp_path, monkeypatch):
        monkeypatch.delenv('SLQ_ND3K_PATH', raising=False)
        path = tmp_path / 'config.json'
        path.write_text(json.dumps({'oracle': {'max_dense_dim': 50}}))
        config = load_config(path)
        assert config['oracle']['max_dense_dim'] == 50
        assert config['lanczos']['breakdown_tol'] == 1e-12

    def test_env_var_selects_file_and_matrix(self, tmp_path, monkeypatch):
        path = tmp_path / 'other.json'
        path.write_text(json.dumps({'slq': {'seed': 9}}))
        monkeypatch.setenv('SLQ_CONFIG', str(path))
        monkeypatch.setenv('SLQ_ND3K_PATH', '/data/nd3k.mtx')
        config = load_config()
        assert config['slq']['seed'] == 9
        assert config['paths']['nd3k_matrix'] == '/data/nd3k.mtx'

    def test_bad_json_reports_line(self, tmp_path):
        path = tmp_path / 'config.json'
        path.write_text('{\n  "oracle": {\n    "max_dense_dim": ,\n  }\n}\n')
        with pytest.raises(MalformedInputError) as excinfo:
            load_config(path)
        assert excinfo.value.line_number == 3

    @pytest.mark.parametrize('override', [
        {'spectrum': {'headroom': 1.5}},
        {'spectrum': {'safety': 0.5}},
        {'oracle': {'max_dense_dim': 0}},
        {'sweep': {'eps_star_min': 0.3, 'eps_star_max': 0.2}},
        {'lanczos': 'on'},
    ])
    def test_invalid_values(self, tmp_path, override):
        path = tmp_path / 'config.json'
        path.write_text(json.dumps(override))
        with pytest.raises(InvalidInputError):
            load_config(path)
