function factorial (n:int): int
{
if n == 0 then 1 else n * factorial(n-1)
}

method computeFactorial(n:int) returns (f:int)
  requires n >= 0
  ensures f == factorial(n)
