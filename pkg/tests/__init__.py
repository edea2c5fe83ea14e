# Test package for tensor-ccs
