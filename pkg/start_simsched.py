#!/usr/bin/env python3
# simsched 启动脚本
import sys
import os

# 添加项目路径到Python路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from simsched.cli import main

if __name__ == "__main__":
    sys.exit(main())
