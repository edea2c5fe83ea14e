# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

import sys

from tensor_ccs.cli import main

sys.exit(main())
