import runpy
import shutil
import subprocess
from pathlib import Path

import pytest

DEMOS = Path(__file__).resolve().parent.parent / "demos"


@pytest.mark.parametrize("script", sorted(DEMOS.glob("*.py")), ids=lambda p: p.name)
def test_demo_runs(script, capsys):
    runpy.run_path(str(script), run_name="__main__")
    assert capsys.readouterr().out


@pytest.mark.skipif(shutil.which("quasigold") is None, reason="console script not installed")
def test_cli_demo_runs():
    out = subprocess.run(["bash", str(DEMOS / "08_cli_pipeline.sh")], capture_output=True, text=True, check=True)
    assert "verdict" in out.stdout
