# 测试公共夹具
import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from shared.protocol import Mode
from simsched.instances import Identical, Related, Unrelated, make_instance
from simsched.oracle import EnumerationBudget


@pytest.fixture
def budget():
    return EnumerationBudget(max_states=2_000_000)


@pytest.fixture
def lpt_example():
    """m=2, 作业 (5,4,3,3,3): LPT负载 (8,10), f=(9,18)"""
    return make_instance(Identical(2), Mode.NP, [5, 4, 3, 3, 3], label="lpt example")


@pytest.fixture
def small_identical():
    return make_instance(Identical(2), Mode.NP, [3, 2, 2], label="3-2-2")


@pytest.fixture
def related_fp():
    return make_instance(Related((3.0, 1.0)), Mode.FP, [1.0], label="speeds 3,1")


@pytest.fixture
def unrelated_small():
    return make_instance(Unrelated(((1.0, 5.0), (4.0, 2.0))), Mode.NP, label="2x2")


@pytest.fixture
def write_json(tmp_path):
    """把字典写成JSON文件, 返回路径字符串"""
    def write(name, document):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)
    return write
