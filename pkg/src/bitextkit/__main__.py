from bitextkit.cli import main

main()
