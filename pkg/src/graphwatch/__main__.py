import sys

from graphwatch.cli import main

sys.exit(main())
