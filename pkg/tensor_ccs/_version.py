# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

VERSION = "0.1.0"
