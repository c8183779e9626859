import os
import subprocess
import sys

import pytest

from qkdauth import _backend

PROBE = "from qkdauth._backend import BACKEND; print(BACKEND)"


def probe(env_extra, code=PROBE):
    env = {**os.environ, **env_extra}
    return subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout.strip()


def test_env_var_forces_python():
    assert probe({"QKDAUTH_PURE_PYTHON": "1"}) == "python"


def test_missing_extension_falls_back():
    # a meta-path hook that refuses the compiled module simulates a failed build
    code = (
        "import sys\n"
        "class Block:\n"
        "    def find_spec(self, name, path=None, target=None):\n"
        "        if name == 'qkdauth._kernels':\n"
        "            raise ImportError('blocked')\n"
        "sys.meta_path.insert(0, Block())\n" + PROBE
    )
    assert probe({"QKDAUTH_PURE_PYTHON": ""}, code) == "python"


@pytest.mark.skipif("cython" not in _backend.available(), reason="extension not built")
def test_default_prefers_extension():
    assert probe({"QKDAUTH_PURE_PYTHON": ""}) == "cython"


def test_backends_expose_same_api():
    for mod in _backend.available().values():
        assert callable(mod.toeplitz_mul) and callable(mod.toeplitz_mul_blocks)
        assert mod.NAME in ("python", "cython")
