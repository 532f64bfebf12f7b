"""Run covert-ppm as a module: python -m covert_ppm <verb> ..."""

from covert_ppm.main import main

if __name__ == "__main__":
    main()
