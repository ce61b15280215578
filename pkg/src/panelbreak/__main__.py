import sys

from panelbreak.cli import main

sys.exit(main())
