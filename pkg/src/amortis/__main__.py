from amortis.cli import main
import sys
sys.exit(main())
