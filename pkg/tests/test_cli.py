import numpy as np
import pytest

from main import main, param_count_table
from src.utils.document_parser import DocumentParser, build_document
from src.utils.helpers import distinct_levels
from src.utils.linalg import hermitian_eig, identity


@pytest.fixture
def parser():
    return DocumentParser()


def test_generate_is_deterministic(capsys):
    assert main(["generate", "--scheme", "flag", "--n", "3", "--seed", "7"]) == 0
    first = capsys.readouterr().out
    assert main(["generate", "--scheme", "flag", "--n", "3", "--seed", "7"]) == 0
    assert capsys.readouterr().out == first
    assert '"kind": "unitary"' in first


def test_generate_grassmann_parameters(parser, tmp_path):
    out = tmp_path / "g.json"
    assert main(["generate", "--scheme", "grassmann", "--n", "8", "--k", "4", "--seed", "1", "--out", str(out)]) == 0
    doc = parser.load(out)
    assert doc.params.count == 32
    assert doc.kind == "unitary"
    assert doc.meta.rank == 4


def test_generate_count_writes_numbered_files(tmp_path):
    out = tmp_path / "u.json"
    assert main(["generate", "--scheme", "full", "--n", "2", "--count", "3", "--out", str(out)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["u-0.json", "u-1.json", "u-2.json"]


def test_generate_explicit_parameters(parser, tmp_path):
    out = tmp_path / "f.json"
    assert main(["generate", "--scheme", "flag", "--n", "2", "--params", "0.7853981633974483,1.5707963267948966",
                 "--out", str(out)]) == 0
    m = parser.load(out).to_matrix()
    assert np.all(m[0, :].real >= 0)
    assert abs(m[0, 0] - np.sqrt(0.5)) <= 1e-15


def test_generate_two_level_hermitian(parser, tmp_path):
    out = tmp_path / "h.json"
    args = ["generate", "hermitian", "--kind", "two-level", "--n", "5", "--k", "2", "--theta", "0.6", "--out", str(out)]
    assert main(args) == 0
    doc = parser.load(out, validate=True)
    eigenvalues = hermitian_eig(doc.to_matrix()).eigenvalues
    assert len(distinct_levels(eigenvalues, 1e-9)) == 2
    assert doc.meta.spectrum.kind == "two-level"

    assert main(["verify", "--in", str(out), "--suite", "quadratic"]) == 0
    assert main(["verify", "--in", str(out), "--suite", "hermitian"]) == 0


def test_factorize_round_trip(parser, tmp_path):
    source, result = tmp_path / "u.json", tmp_path / "p.json"
    assert main(["generate", "--scheme", "full", "--n", "4", "--seed", "3", "--out", str(source)]) == 0
    assert main(["factorize", "--in", str(source), "--out", str(result)]) == 0
    original = parser.load(source).to_matrix()
    recovered = parser.load(result, validate=True)
    assert recovered.kind == "params"
    assert np.max(np.abs(recovered.to_matrix() - original)) <= 1e-12
    assert main(["verify", "--in", str(result), "--suite", "round-trip"]) == 0


def test_factorize_identity_gives_zero_parameters(parser, tmp_path):
    source, result = tmp_path / "i.json", tmp_path / "p.json"
    parser.save(build_document("unitary", identity(3)), source)
    assert main(["factorize", "--in", str(source), "--out", str(result)]) == 0
    assert all(x == 0.0 for x in parser.load(result).to_params().flatten())


def test_factorize_rejects_non_unitary(tmp_path, capsys):
    source = tmp_path / "h.json"
    assert main(["generate", "hermitian", "--kind", "positive-trace", "--n", "3", "--out", str(source)]) == 0
    assert main(["factorize", "--in", str(source)]) == 1
    assert "M*M - I" in capsys.readouterr().err


def test_verify_projection(tmp_path):
    out = tmp_path / "p.json"
    assert main(["generate", "--scheme", "grassmann", "--n", "5", "--k", "3", "--out", str(out)]) == 0
    assert main(["verify", "--in", str(out), "--suite", "projection"]) == 0


def test_verify_fails_on_perturbed_unitary(parser, tmp_path, capsys):
    out = tmp_path / "u.json"
    assert main(["generate", "--scheme", "full", "--n", "3", "--out", str(out)]) == 0
    m = parser.load(out).to_matrix()
    m[1, 2] += 1e-6
    parser.save(build_document("unitary", m), out)
    assert main(["verify", "--in", str(out), "--suite", "unitary"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_main_theorem_on_isometry(tmp_path):
    out = tmp_path / "c.json"
    assert main(["generate", "--scheme", "stiefel-full", "--n", "6", "--k", "2", "--as", "isometry", "--out", str(out)]) == 0
    assert main(["verify", "--in", str(out), "--suite", "main-theorem"]) == 0


@pytest.mark.parametrize(
    "args",
    [
        ["generate", "--scheme", "grassmann", "--n", "4", "--k", "4"],
        ["generate", "--scheme", "stiefel-full", "--n", "4"],
        ["generate", "--scheme", "flag", "--n", "0"],
        ["generate", "hermitian", "--n", "3"],
    ],
)
def test_invalid_input_is_a_usage_error(args):
    assert main(args) == 2


def test_missing_input_file(tmp_path):
    assert main(["verify", "--in", str(tmp_path / "absent.json"), "--suite", "unitary"]) == 2


def test_spectrum_command(capsys):
    assert main(["spectrum", "--kind", "traceless", "--n", "4", "--p", "2", "--angles", "0.7853981633974483,0.7853981633974483"]) == 0
    out = capsys.readouterr().out
    assert "traceless" in out
    assert "-0.5" in out


def test_dim_table(capsys):
    table = param_count_table(8, 4).set_index("scheme")["parameters"]
    assert table["grassmann"] == 32
    assert table["full"] == 64
    assert table["stiefel-reduced"] == 44
    assert main(["dim", "--n", "8", "--k", "4"]) == 0
    assert "grassmann" in capsys.readouterr().out
