import sys

from tedium.sem.cli.main import main

sys.exit(main())
