#!/usr/bin/env python3


from blockorder.main import run_cli


if __name__ == '__main__':
    run_cli()
