import subprocess
import sys

import pytest

from charwnn.cli import EXIT_DATA, EXIT_DIVERGED, EXIT_OK, EXIT_USAGE, build_parser, main, resolve_config
from charwnn.corpus_io import read_conll, write_conll
from charwnn.model import Hyperparameters
from charwnn.synthetic import generate

SMALL = ["--hp", "d_wrd=8", "--hp", "k_wrd=3", "--hp", "d_chr=4", "--hp", "k_chr=3",
         "--hp", "cl_u=6", "--hp", "hl_u=12"]


@pytest.fixture
def corpus_files(tmp_path):
    paths = {}
    for name, n, seed in [("train", 30, 1), ("dev", 8, 2), ("test", 8, 3)]:
        p = tmp_path / f"{name}.txt"
        with open(p, "w", encoding="utf-8") as fh:
            write_conll(generate(n, seed), fh)
        paths[name] = str(p)
    return paths


def train_args(files, model, *extra):
    return ["train", "--train", files["train"], "--dev", files["dev"], "--model", str(model),
            "--epochs", "3", "--lr", "0.02", *SMALL, *extra]


def config_args(*argv):
    return build_parser().parse_args(["train", *argv])


class TestConfigPrecedence:
    def test_defaults(self):
        hp, paths = resolve_config(config_args())
        assert hp == Hyperparameters.for_variant("charwnn")
        assert paths == {}

    @pytest.mark.parametrize(
        "field, file_value, flag, flag_value, expected_file, expected_flag",
        [
            ("learning_rate", "0.01", "--lr", "0.005", 0.01, 0.005),
            ("epochs_max", "4", "--epochs", "9", 4, 9),
            ("seed", "3", "--seed", "5", 3, 5),
            ("lr_decay", "0.1", "--lr-decay", "0.2", 0.1, 0.2),
            ("hl_u", "40", "--hp", "hl_u=50", 40, 50),
            ("d_wrd", "20", "--hp", "d_wrd=30", 20, 30),
            ("cl_u", "7", "--hp", "cl_u=9", 7, 9),
        ],
    )
    def test_flag_beats_file_beats_default(self, tmp_path, field, file_value, flag, flag_value,
                                           expected_file, expected_flag):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"# comment\n{field} = {file_value}\n")
        hp_file, _ = resolve_config(config_args("--config", str(cfg)))
        assert getattr(hp_file, field) == expected_file
        hp_flag, _ = resolve_config(config_args("--config", str(cfg), flag, flag_value))
        assert getattr(hp_flag, field) == expected_flag
        assert getattr(Hyperparameters.for_variant("charwnn"), field) not in (expected_file, expected_flag)

    def test_boolean_fields(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("freeze_embeddings=false\ndecode_mask=no\n")
        hp, _ = resolve_config(config_args("--config", str(cfg)))
        assert not hp.freeze_embeddings and not hp.decode_mask
        hp, _ = resolve_config(config_args("--config", str(cfg), "--freeze-embeddings", "--decode-mask"))
        assert hp.freeze_embeddings and hp.decode_mask

    def test_variant_and_paths(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("variant=wnn\ntrain=a.txt\nmodel=m.bin\n")
        hp, paths = resolve_config(config_args("--config", str(cfg), "--model", "other.bin"))
        assert hp.variant == "wnn" and hp.capitalization
        assert paths == {"train": "a.txt", "model": "other.bin"}
        hp, _ = resolve_config(config_args("--config", str(cfg), "--variant", "charnn"))
        assert (hp.d_chr, hp.cl_u) == (50, 200)

    def test_unknown_key_is_usage_error(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("hl_units=3\n")
        assert main(["train", "--config", str(cfg)]) == EXIT_USAGE
        assert "unknown key" in capsys.readouterr().err


class TestExitCodes:
    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["train", "--seed", "notanint"])
        assert exc.value.code == EXIT_USAGE

    def test_missing_command(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == EXIT_USAGE

    def test_train_without_paths(self):
        assert main(["train"]) == EXIT_USAGE

    def test_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("a O\nb\n")
        assert main(["train", "--train", str(bad), "--model", str(tmp_path / "m")]) == EXIT_DATA
        assert "line 2" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["evaluate", str(tmp_path / "nope.txt")]) == EXIT_DATA

    def test_divergence(self, corpus_files, tmp_path, capsys):
        code = main(train_args(corpus_files, tmp_path / "m.bin", "--lr", "1e308"))
        assert code == EXIT_DIVERGED
        assert "diverged" in capsys.readouterr().err

    def test_module_entry_point(self):
        out = subprocess.run([sys.executable, "-m", "charwnn", "--version"], capture_output=True, text=True)
        assert out.returncode == 0 and out.stdout.startswith("charwnn ")


class TestPreprocess:
    def test_normalized_column(self, tmp_path, capsys):
        src = tmp_path / "in.txt"
        src.write_text("In O\n1984 O\nMadrid B-LOC\n")
        assert main(["preprocess", str(src)]) == EXIT_OK
        assert capsys.readouterr().out == "In in O\n1984 0000 O\nMadrid madrid B-LOC\n"

    def test_idempotent(self, tmp_path):
        src, once, twice = tmp_path / "in.txt", tmp_path / "1.txt", tmp_path / "2.txt"
        src.write_text("Wolff B-PER\n, O\n\nRío B-LOC\n")
        main(["preprocess", str(src), "-o", str(once)])
        main(["preprocess", str(once), "-o", str(twice)])
        assert once.read_text() == twice.read_text()

    def test_non_roman_flag(self, tmp_path, capsys):
        src = tmp_path / "in.txt"
        src.write_text("Αθήνα-Köln B-LOC\n")
        main(["preprocess", str(src)])
        assert capsys.readouterr().out == "Αθήνα-Köln αθήνα-köln B-LOC\n"
        main(["preprocess", str(src), "--non-roman"])
        assert capsys.readouterr().out == "#####-Köln #####-köln B-LOC\n"
        main(["preprocess", str(src), "--non-roman", "--substitute", "_"])
        assert capsys.readouterr().out.startswith("_____-Köln")


class TestTrainTagEvaluate:
    def test_pipeline(self, corpus_files, tmp_path, capsys):
        model = tmp_path / "m.bin"
        assert main(train_args(corpus_files, model, "--test", corpus_files["test"])) == EXIT_OK
        out = capsys.readouterr().out
        assert "# hyperparameters" in out and "d_wrd=8" in out
        assert out.count("epoch ") >= 3 and "best_epoch=" in out
        assert "processed" in out
        report = (tmp_path / "m.bin.report").read_text().splitlines()
        assert "variant=charwnn" in report and report[-1].startswith("best_epoch=")

        tagged = tmp_path / "tagged.txt"
        assert main(["tag", corpus_files["test"], "--model", str(model), "--with-gold", "-o", str(tagged)]) == 0
        lines = [line for line in tagged.read_text().splitlines() if line]
        assert all(len(line.split()) == 3 for line in lines)
        assert main(["evaluate", str(tagged), "--name", "CharWNN"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("processed")
        assert "CharWNN Prec." in out and "Overall" in out

        plain = tmp_path / "plain.txt"
        main(["tag", corpus_files["test"], "--model", str(model), "-o", str(plain)])
        pred = read_conll(open(plain, encoding="utf-8"))
        assert main(["evaluate", "--gold", corpus_files["test"], "--predicted", str(plain)]) == EXIT_OK
        assert len(pred) == 8

    def test_same_seed_same_bytes(self, corpus_files, tmp_path):
        a, b, c = tmp_path / "a.bin", tmp_path / "b.bin", tmp_path / "c.bin"
        main(train_args(corpus_files, a, "--seed", "4"))
        main(train_args(corpus_files, b, "--seed", "4"))
        main(train_args(corpus_files, c, "--seed", "5"))
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes() != c.read_bytes()

    def test_stride_dev_split(self, corpus_files, tmp_path, capsys):
        args = train_args(corpus_files, tmp_path / "m.bin")
        i = args.index("--dev")
        del args[i : i + 2]
        assert main(args) == EXIT_OK
        assert "held out 1 sentences" in capsys.readouterr().out

    @pytest.mark.parametrize("variant, needle", [("charnn", "d_chr=50"), ("wnn", "suffix=size-3 dim=5")])
    def test_variant_header(self, corpus_files, tmp_path, capsys, variant, needle):
        args = ["train", "--train", corpus_files["train"], "--dev", corpus_files["dev"],
                "--model", str(tmp_path / "m.bin"), "--epochs", "1", "--variant", variant,
                "--hp", "hl_u=8", "--hp", "k_wrd=3"]
        assert main(args) == EXIT_OK
        assert needle in capsys.readouterr().out.splitlines()

    def test_embeddings(self, corpus_files, tmp_path, capsys):
        emb = tmp_path / "vec.txt"
        emb.write_text("2 6\nmadrid 1 0 0 0 0 0\nmr 0 1 0 0 0 0\n")
        args = train_args(corpus_files, tmp_path / "m.bin", "--embeddings", str(emb), "--freeze-embeddings")
        assert main(args) == EXIT_OK
        out = capsys.readouterr().out
        assert "d_wrd=6" in out.splitlines() and "freeze_embeddings=true" in out

    def test_tag_empty_input(self, corpus_files, tmp_path, capsys):
        model = tmp_path / "m.bin"
        main(train_args(corpus_files, model, "--epochs", "1"))
        capsys.readouterr()
        empty = tmp_path / "empty.txt"
        empty.write_text("")
        assert main(["tag", str(empty), "--model", str(model)]) == EXIT_OK
        assert capsys.readouterr().out == ""

    def test_tag_rejects_bad_model(self, tmp_path):
        bad = tmp_path / "m.bin"
        bad.write_bytes(b"junk")
        src = tmp_path / "in.txt"
        src.write_text("a\n")
        assert main(["tag", str(src), "--model", str(bad)]) == EXIT_DATA

    def test_evaluate_perfect(self, tmp_path, capsys):
        f = tmp_path / "e.txt"
        f.write_text("Wolff B-PER B-PER\nDel B-PER B-PER\nBosque I-PER I-PER\n")
        assert main(["evaluate", str(f)]) == EXIT_OK
        assert "FB1: 100.00" in capsys.readouterr().out

    def test_evaluate_misaligned(self, tmp_path):
        g, p = tmp_path / "g.txt", tmp_path / "p.txt"
        g.write_text("a O\nb O\n")
        p.write_text("a O\n")
        assert main(["evaluate", "--gold", str(g), "--predicted", str(p)]) == EXIT_DATA

    def test_gradcheck_command(self, corpus_files, capsys):
        code = main(["gradcheck", "--train", corpus_files["dev"], "--hp", "d_wrd=3", "--hp", "k_wrd=3",
                     "--hp", "d_chr=2", "--hp", "k_chr=3", "--hp", "cl_u=3", "--hp", "hl_u=4"])
        out = capsys.readouterr().out
        assert code == EXIT_OK, out
        assert "transitions" in out and "FAIL" not in out
