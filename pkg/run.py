#!/usr/bin/env python
"""Run covert-ppm from a source checkout without installing it."""

from covert_ppm.main import main

if __name__ == "__main__":
    main()
